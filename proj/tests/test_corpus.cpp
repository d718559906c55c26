#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <map>

#include "dftforge/corpus.hpp"
#include "dftforge/util.hpp"
#include "support/gen_designs.hpp"

using namespace dftforge;

namespace {

std::string fixture_path(const std::string& name) {
    return std::string(FIXTURES_DIR) + "/netlists/" + name;
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& name) : path(std::filesystem::temp_directory_path() / name) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string str() const { return path.string(); }
};

} // namespace

TEST_CASE("admit: clean design rejected as zero-violations") {
    TempDir tmp("dft_admit_clean");
    AdmissionEntry e = admit_file(fixture_path("clean_shift_register.json"), {}, tmp.str());
    CHECK(e.verdict == AdmissionVerdict::ZeroViolations);
    CHECK_FALSE(e.label.has_value());
}

TEST_CASE("admit: ripple divider admitted as FFCKNP under the collapse rule") {
    TempDir tmp("dft_admit_ripple");
    AdmissionEntry e = admit_file(fixture_path("ffcknp_pos_ripple.json"), {}, tmp.str());
    CHECK(e.verdict == AdmissionVerdict::Admitted);
    REQUIRE(e.label.has_value());
    CHECK(*e.label == DftErrorKind::FFCKNP);
    CHECK(e.json_path == fixture_path("ffcknp_pos_ripple.json")); // JSON-native: no copy
}

TEST_CASE("admit: synthesis/validation failures carry diagnostics") {
    TempDir tmp("dft_admit_fail");
    // unparseable JSON netlist
    const std::string bad = tmp.str() + "/bad.json";
    write_file(bad, "{\"modules\": {\"t\": {\"cells\": {\"u\": {\"type\": \"$magic\"}}}}}");
    AdmissionEntry e = admit_file(bad, {}, tmp.str());
    CHECK(e.verdict == AdmissionVerdict::SynthFail);
    CHECK(e.diagnostics.find("unknown cell kind") != std::string::npos);

    // Verilog source with a failing tool
    const std::string v = tmp.str() + "/design.v";
    write_file(v, "module m(); endmodule");
    SynthesisHook hook;
    hook.command = "sh " + std::string(FIXTURES_DIR) + "/tools/fake_synth_fail.sh {in} {out}";
    hook.workdir = tmp.str();
    e = admit_file(v, hook, tmp.str());
    CHECK(e.verdict == AdmissionVerdict::SynthFail);
    CHECK(e.diagnostics.find("syntax error") != std::string::npos);

    // missing file: reported, batch would continue
    e = admit_file(tmp.str() + "/nope.v", {}, tmp.str());
    CHECK(e.verdict == AdmissionVerdict::SynthFail);
}

TEST_CASE("admit: no-logic and multi-violation rejections") {
    TempDir tmp("dft_admit_misc");
    const std::string empty = tmp.str() + "/empty.json";
    write_file(empty, R"({"modules": {"t": {"ports": {
        "a": {"direction": "input", "bits": [2]}}, "cells": {}}}})");
    AdmissionEntry e = admit_file(empty, {}, tmp.str());
    CHECK(e.verdict == AdmissionVerdict::NoLogic);

    const std::string multi = tmp.str() + "/multi.json";
    write_file(multi, R"({"modules": {"top": {"ports": {
        "clk": {"direction": "input", "bits": [2]},
        "d":   {"direction": "input", "bits": [3]},
        "q":   {"direction": "output", "bits": [7]}},
        "cells": {
        "rg":  {"type": "$dff",  "connections": {"D": [3], "Q": [4], "CLK": [2]}},
        "bad": {"type": "$adff", "connections": {"D": [3], "Q": [5], "CLK": [2], "ARST": [4]}},
        "dv1": {"type": "$dff",  "connections": {"D": [3], "Q": [6], "CLK": [2]}},
        "dv2": {"type": "$dff",  "connections": {"D": [3], "Q": [7], "CLK": [6]}}}}}})");
    e = admit_file(multi, {}, tmp.str());
    CHECK(e.verdict == AdmissionVerdict::MultiViolation);
}

TEST_CASE("admit: synthesized sources get their JSON written to the out dir") {
    TempDir tmp("dft_admit_synth");
    const std::string v = tmp.str() + "/counter.v";
    write_file(v, "module counter(); endmodule");
    SynthesisHook hook;
    hook.command = "sh " + std::string(FIXTURES_DIR) + "/tools/fake_synth_ok.sh {in} {out}";
    hook.workdir = tmp.str() + "/work";
    AdmissionEntry e = admit_file(v, hook, tmp.str() + "/json");
    // the fake tool emits a clean DFF: rejected zero-violations, but the
    // pipeline must have parsed it
    CHECK(e.verdict == AdmissionVerdict::ZeroViolations);
}

TEST_CASE("admission entries round-trip through JSONL") {
    TempDir tmp("dft_admit_rt");
    AdmissionEntry e = admit_file(fixture_path("acncpi_pos_ff_reset.json"), {}, tmp.str());
    AdmissionEntry r = AdmissionEntry::from_json(e.to_json());
    CHECK(r.id == e.id);
    CHECK(r.verdict == e.verdict);
    REQUIRE(r.label.has_value());
    CHECK(*r.label == DftErrorKind::ACNCPI);
}

TEST_CASE("partition: 10 entries of one label split 2/1/7") {
    std::vector<AdmissionEntry> admitted;
    TempDir tmp("dft_part_10");
    for (int i = 0; i < 10; ++i) {
        const std::string p = tmp.str() + "/d" + std::to_string(i) + ".json";
        write_file(p, read_file(fixture_path("acncpi_pos_ff_reset.json")));
        AdmissionEntry e = admit_file(p, {}, tmp.str());
        REQUIRE(e.verdict == AdmissionVerdict::Admitted);
        admitted.push_back(e);
    }
    PartitionConfig cfg;
    cfg.seed = 5;
    Manifest m = partition(admitted, cfg);
    std::map<std::string, int> counts;
    for (const auto& e : m.entries) ++counts[e.split];
    CHECK(counts["train"] == 2);
    CHECK(counts["reference"] == 1);
    CHECK(counts["test"] == 7);
}

TEST_CASE("partition: stratified 20/8/72 within one file per stratum") {
    auto designs = gen_designs::generate_corpus(30, 99); // 30 per family
    TempDir tmp("dft_part_strata");
    std::vector<AdmissionEntry> admitted;
    for (const auto& d : designs) {
        const std::string p = tmp.str() + "/" + d.id + ".json";
        write_file(p, d.buggy_json);
        AdmissionEntry e = admit_file(p, {}, tmp.str());
        REQUIRE(e.verdict == AdmissionVerdict::Admitted);
        REQUIRE(*e.label == d.kind);
        admitted.push_back(e);
    }
    PartitionConfig cfg;
    cfg.seed = 11;
    Manifest m = partition(admitted, cfg);

    std::map<DftErrorKind, std::map<std::string, double>> per;
    for (const auto& e : m.entries) {
        for (int i = 0; i < 4; ++i)
            if (e.label[i]) per[static_cast<DftErrorKind>(i + 1)][e.split] += 1;
    }
    for (auto& [kind, counts] : per) {
        const double n = counts["train"] + counts["reference"] + counts["test"];
        CHECK(std::abs(counts["train"] - 0.20 * n) <= 1.0);
        CHECK(std::abs(counts["reference"] - 0.08 * n) <= 1.0);
        CHECK(std::abs(counts["test"] - 0.72 * n) <= 1.0);
        CHECK(counts["train"] >= 1); // every label reaches the train split
    }
}

TEST_CASE("partition: deterministic under a fixed seed, different under another") {
    auto designs = gen_designs::generate_corpus(6, 123);
    TempDir tmp("dft_part_seed");
    std::vector<AdmissionEntry> admitted;
    for (const auto& d : designs) {
        const std::string p = tmp.str() + "/" + d.id + ".json";
        write_file(p, d.buggy_json);
        admitted.push_back(admit_file(p, {}, tmp.str()));
    }
    PartitionConfig cfg;
    cfg.seed = 42;
    Manifest a = partition(admitted, cfg);
    Manifest b = partition(admitted, cfg);
    CHECK(a.to_jsonl() == b.to_jsonl());
    cfg.seed = 43;
    Manifest c = partition(admitted, cfg);
    CHECK(a.to_jsonl() != c.to_jsonl());
}

TEST_CASE("partition: tiny strata warn and prioritize train") {
    TempDir tmp("dft_part_tiny");
    const std::string p = tmp.str() + "/only.json";
    write_file(p, read_file(fixture_path("clknpi_pos_gated.json")));
    AdmissionEntry e = admit_file(p, {}, tmp.str());
    REQUIRE(e.verdict == AdmissionVerdict::Admitted);
    PartitionConfig cfg;
    std::vector<std::string> warnings;
    Manifest m = partition({e}, cfg, &warnings);
    REQUIRE(m.entries.size() == 1);
    CHECK(m.entries[0].split == "train");
    CHECK_FALSE(warnings.empty());
}

TEST_CASE("manifest: jsonl round trip and hash verification") {
    TempDir tmp("dft_manifest");
    const std::string p = tmp.str() + "/d.json";
    write_file(p, read_file(fixture_path("acncpi_pos_ff_reset.json")));
    AdmissionEntry e = admit_file(p, {}, tmp.str());
    Manifest m = partition({e}, PartitionConfig{});
    std::string jsonl = m.to_jsonl();

    Manifest r = Manifest::from_jsonl(jsonl);
    REQUIRE(r.entries.size() == 1);
    CHECK(r.entries[0].label == std::array<int, 4>{1, 0, 0, 0});
    r.verify_hashes(); // intact

    write_file(p, "{\"tampered\": true}");
    CHECK_THROWS_WITH_AS(r.verify_hashes(), doctest::Contains("drifted"), Error);

    CHECK_THROWS_AS(Manifest::from_jsonl("{\"id\": \"x\"}"), Error);      // missing fields
    CHECK_THROWS_AS(Manifest::from_jsonl(
                        R"({"id":"x","json_path":"p","label":[1,1,0,0],"split":"train"})"),
                    Error); // two label bits
}

TEST_CASE("generated corpus: every design admits with its intended label, fixes are clean") {
    auto designs = gen_designs::generate_corpus(4, 7);
    TempDir tmp("dft_gen_check");
    for (const auto& d : designs) {
        Netlist buggy = parse_netlist(d.buggy_json);
        CollapseResult c = collapse_label(lint(buggy));
        REQUIRE(c.status == CollapseResult::Status::Single);
        CHECK(c.kind == d.kind);
        Netlist fixed = parse_netlist(d.fixed_json);
        CHECK(lint(fixed).label.clean());
    }
}
