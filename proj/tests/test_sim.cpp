#include "doctest.h"

#include "dftforge/sim.hpp"
#include "dftforge/util.hpp"
#include "support/truth_table.hpp"
#include "json.hpp"

using namespace dftforge;

namespace {

std::string fixture(const std::string& name) {
    return read_file(std::string(FIXTURES_DIR) + "/netlists/" + name);
}

InputMap inputs_one(const std::vector<std::pair<std::string, Tri>>& vals) {
    InputMap in;
    for (const auto& [name, v] : vals) in[name] = {v};
    return in;
}

} // namespace

TEST_CASE("ternary primitives: controlling values beat X") {
    CHECK(tri_and(Tri::T, Tri::T) == Tri::T);
    CHECK(tri_and(Tri::F, Tri::X) == Tri::F);
    CHECK(tri_and(Tri::X, Tri::T) == Tri::X);
    CHECK(tri_or(Tri::T, Tri::X) == Tri::T);
    CHECK(tri_or(Tri::F, Tri::X) == Tri::X);
    CHECK(tri_xor(Tri::T, Tri::F) == Tri::T);
    CHECK(tri_xor(Tri::X, Tri::F) == Tri::X);
    CHECK(tri_not(Tri::X) == Tri::X);
    CHECK(tri_not(Tri::F) == Tri::T);
    CHECK(tri_mux(Tri::T, Tri::F, Tri::F) == Tri::T);  // s=0 -> a
    CHECK(tri_mux(Tri::T, Tri::F, Tri::T) == Tri::F);  // s=1 -> b
    CHECK(tri_mux(Tri::T, Tri::T, Tri::X) == Tri::T);  // matched legs
    CHECK(tri_mux(Tri::T, Tri::F, Tri::X) == Tri::X);
}

TEST_CASE("simulate: combinational evaluation with X propagation") {
    const char* text = R"({"modules": {"top": {"ports": {
        "a": {"direction": "input", "bits": [2]},
        "b": {"direction": "input", "bits": [3]},
        "y": {"direction": "output", "bits": [4]}},
        "cells": {"g": {"type": "$and", "connections": {"A": [2], "B": [3], "Y": [4]}}}}}})";
    Netlist nl = parse_netlist(text);
    Simulator sim(nl);
    SimState st = sim.initial_state();

    auto r = sim.cycle(st, inputs_one({{"a", Tri::T}, {"b", Tri::T}}));
    CHECK(r.outputs.at("y")[0] == Tri::T);
    r = sim.cycle(st, inputs_one({{"a", Tri::F}, {"b", Tri::X}}));
    CHECK(r.outputs.at("y")[0] == Tri::F); // controlling 0
    r = sim.cycle(st, inputs_one({{"a", Tri::T}, {"b", Tri::X}}));
    CHECK(r.outputs.at("y")[0] == Tri::X);
}

TEST_CASE("simulate: missing input assignment is an error") {
    Netlist nl = parse_netlist(fixture("clknpi_neg_pi_clock.json"));
    Simulator sim(nl);
    CHECK_THROWS_WITH_AS(sim.cycle(sim.initial_state(), inputs_one({{"clk", Tri::F}})),
                         doctest::Contains("not assigned"), Error);
}

TEST_CASE("simulate: DFF captures on a 0->1 clock edge only") {
    Netlist nl = parse_netlist(fixture("clknpi_neg_pi_clock.json")); // dff d->q
    Simulator sim(nl);
    SimState st = sim.initial_state();

    // clk starts X: X->1 is not a rising edge, Q stays X
    auto r = sim.cycle(st, inputs_one({{"clk", Tri::T}, {"d", Tri::T}}));
    CHECK(r.outputs.at("q")[0] == Tri::X);
    st = r.next;

    // 1->0: no capture
    r = sim.cycle(st, inputs_one({{"clk", Tri::F}, {"d", Tri::T}}));
    st = r.next;
    CHECK(r.outputs.at("q")[0] == Tri::X);

    // 0->1: capture d=1; the new value is visible on the NEXT cycle's output
    r = sim.cycle(st, inputs_one({{"clk", Tri::T}, {"d", Tri::T}}));
    CHECK(r.outputs.at("q")[0] == Tri::X); // sampled before the edge
    st = r.next;
    r = sim.cycle(st, inputs_one({{"clk", Tri::T}, {"d", Tri::F}}));
    CHECK(r.outputs.at("q")[0] == Tri::T); // captured value now visible
}

TEST_CASE("simulate: ADFF async reset dominates the clock edge") {
    Netlist nl = parse_netlist(fixture("acncpi_neg_direct_pi.json")); // adff
    Simulator sim(nl);
    SimState st = sim.initial_state();

    // assert reset while clocking in d=1: reset wins
    auto r = sim.cycle(st, inputs_one({{"clk", Tri::F}, {"rst", Tri::T}, {"d", Tri::T}}));
    st = r.next;
    r = sim.cycle(st, inputs_one({{"clk", Tri::T}, {"rst", Tri::T}, {"d", Tri::T}}));
    st = r.next;
    r = sim.cycle(st, inputs_one({{"clk", Tri::T}, {"rst", Tri::F}, {"d", Tri::T}}));
    CHECK(r.outputs.at("q")[0] == Tri::F); // cleared, not loaded
}

TEST_CASE("simulate: combinational loop is refused") {
    Netlist nl = parse_netlist(fixture("comb_loop.json"));
    CHECK_THROWS_WITH_AS(Simulator{nl}, doctest::Contains("combinational loop"), Error);
}

TEST_CASE("check_equivalence: a design equals itself (bounded)") {
    for (const char* name : {"clean_shift_register.json", "clknpi_neg_comb_only.json",
                             "ffcknp_pos_ripple.json", "cdfdat_pos_clock_to_en.json"}) {
        Netlist a = parse_netlist(fixture(name));
        Netlist b = parse_netlist(fixture(name));
        EquivBudget budget;
        budget.random_stimuli = 64;
        budget.cycles = 8;
        EquivVerdict v = check_equivalence(a, b, budget);
        CHECK(v.kind == EquivVerdict::Kind::EquivalentBounded);
    }
}

TEST_CASE("check_equivalence: AND vs OR found by exhaustive enumeration") {
    const char* and_t = R"({"modules": {"top": {"ports": {
        "p": {"direction": "input", "bits": [2]},
        "q": {"direction": "input", "bits": [3]},
        "y": {"direction": "output", "bits": [4]}},
        "cells": {"g": {"type": "$and", "connections": {"A": [2], "B": [3], "Y": [4]}}}}}})";
    const char* or_t = R"({"modules": {"top": {"ports": {
        "p": {"direction": "input", "bits": [2]},
        "q": {"direction": "input", "bits": [3]},
        "y": {"direction": "output", "bits": [4]}},
        "cells": {"g": {"type": "$or", "connections": {"A": [2], "B": [3], "Y": [4]}}}}}})";
    Netlist a = parse_netlist(and_t);
    Netlist b = parse_netlist(or_t);
    EquivVerdict v = check_equivalence(a, b, EquivBudget{});
    REQUIRE(v.kind == EquivVerdict::Kind::Counterexample);
    CHECK(v.exhaustive);
    REQUIRE(v.cex.has_value());
    // mismatch requires exactly one input high
    const auto& in = v.cex->stimulus.cycles.at(v.cex->cycle);
    int highs = (in.at("p")[0] == Tri::T ? 1 : 0) + (in.at("q")[0] == Tri::T ? 1 : 0);
    CHECK(highs == 1);
    CHECK(replay_counterexample(a, b, *v.cex));
}

TEST_CASE("check_equivalence: interface mismatches are INCOMPARABLE") {
    const char* y_port = R"({"modules": {"top": {"ports": {
        "a": {"direction": "input", "bits": [2]},
        "y": {"direction": "output", "bits": [3]}},
        "cells": {"g": {"type": "$not", "connections": {"A": [2], "Y": [3]}}}}}})";
    const char* z_port = R"({"modules": {"top": {"ports": {
        "a": {"direction": "input", "bits": [2]},
        "z": {"direction": "output", "bits": [3]}},
        "cells": {"g": {"type": "$not", "connections": {"A": [2], "Y": [3]}}}}}})";
    EquivVerdict v = check_equivalence(parse_netlist(y_port), parse_netlist(z_port), EquivBudget{});
    REQUIRE(v.kind == EquivVerdict::Kind::Incomparable);
    CHECK(v.reason.find("\"y\"") != std::string::npos);
    CHECK(v.reason.find("\"z\"") != std::string::npos);

    const char* wide = R"({"modules": {"top": {"ports": {
        "a": {"direction": "input", "bits": [2, 4]},
        "y": {"direction": "output", "bits": [3, 5]}},
        "cells": {"g": {"type": "$not", "connections": {"A": [2, 4], "Y": [3, 5]}}}}}})";
    v = check_equivalence(parse_netlist(y_port), parse_netlist(wide), EquivBudget{});
    REQUIRE(v.kind == EquivVerdict::Kind::Incomparable);
    CHECK(v.reason.find("width") != std::string::npos);
}

TEST_CASE("check_equivalence: X-dominated comparison is refused") {
    // output driven by an x constant in one design
    const char* xout = R"({"modules": {"top": {"ports": {
        "a": {"direction": "input", "bits": [2]},
        "y": {"direction": "output", "bits": ["x"]}},
        "cells": {}}}})";
    const char* aout = R"({"modules": {"top": {"ports": {
        "a": {"direction": "input", "bits": [2]},
        "y": {"direction": "output", "bits": [2]}},
        "cells": {}}}})";
    EquivVerdict v = check_equivalence(parse_netlist(xout), parse_netlist(aout), EquivBudget{});
    REQUIRE(v.kind == EquivVerdict::Kind::Incomparable);
    CHECK(v.reason.find("X-dominated") != std::string::npos);
    CHECK(v.skipped == v.stimuli_run);
}

TEST_CASE("check_equivalence: sequential counterexample replays deterministically") {
    // ripple divider vs its enable rewrite are NOT cycle-equivalent
    Netlist a = parse_netlist(fixture("ref_ripple.json"));
    Netlist b = parse_netlist(fixture("ref_ripple.fixed.json"));
    EquivBudget budget;
    budget.random_stimuli = 256;
    budget.cycles = 16;
    budget.seed = 7;
    EquivVerdict v = check_equivalence(a, b, budget);
    REQUIRE(v.kind == EquivVerdict::Kind::Counterexample);
    CHECK(replay_counterexample(a, b, *v.cex));
    // replay twice: same answer
    CHECK(replay_counterexample(a, b, *v.cex));
}

TEST_CASE("exhaustive mode agrees with the truth-table oracle") {
    // random 6-input single-output DAGs, compared design vs itself via the
    // independent evaluator
    DetRng rng(2026);
    for (int trial = 0; trial < 6; ++trial) {
        nlohmann::json cells = nlohmann::json::object();
        std::vector<std::int64_t> avail = {2, 3, 4, 5, 6, 7};
        std::int64_t next = 8;
        const char* kinds[] = {"$and", "$or", "$xor", "$nand", "$nor", "$xnor"};
        for (int g = 0; g < 7; ++g) {
            std::int64_t a = avail[rng.index(avail.size())];
            std::int64_t b = avail[rng.index(avail.size())];
            std::int64_t y = next++;
            cells["g" + std::to_string(g)] = {
                {"type", kinds[rng.index(6)]},
                {"connections", {{"A", {a}}, {"B", {b}}, {"Y", {y}}}}};
            avail.push_back(y);
        }
        nlohmann::json ports = nlohmann::json::object();
        const char* in_names[] = {"i0", "i1", "i2", "i3", "i4", "i5"};
        for (int i = 0; i < 6; ++i)
            ports[in_names[i]] = {{"direction", "input"}, {"bits", {i + 2}}};
        ports["y"] = {{"direction", "output"}, {"bits", {next - 1}}};
        nlohmann::json root = {{"modules", {{"top", {{"ports", ports}, {"cells", cells}}}}}};

        Netlist nl = parse_netlist(root.dump());
        Simulator sim(nl);
        for (std::uint64_t v = 0; v < 64; ++v) {
            InputMap in;
            for (int i = 0; i < 6; ++i)
                in[in_names[i]] = {((v >> i) & 1) ? Tri::T : Tri::F};
            auto got = sim.cycle(sim.initial_state(), in).outputs.at("y")[0];
            auto want = truth_table::evaluate(nl, v).at("y")[0];
            CHECK(got == (want ? Tri::T : Tri::F));
        }
    }
}

TEST_CASE("verdict serialization") {
    Netlist a = parse_netlist(fixture("clknpi_neg_comb_only.json"));
    Netlist b = parse_netlist(fixture("clknpi_neg_comb_only.json"));
    EquivVerdict v = check_equivalence(a, b, EquivBudget{});
    nlohmann::json j = nlohmann::json::parse(verdict_json(v));
    CHECK(j["verdict"] == "EQUIVALENT_BOUNDED");
    CHECK(j["exhaustive"] == true);
    CHECK(j["stimuli_run"] == 4); // two input bits
    CHECK(verdict_text(v).find("EQUIVALENT_BOUNDED") != std::string::npos);
}
