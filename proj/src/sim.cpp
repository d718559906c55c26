#include "dftforge/sim.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

#include "json.hpp"

using nlohmann::json;

namespace dftforge {

char tri_char(Tri v) { return v == Tri::F ? '0' : v == Tri::T ? '1' : 'x'; }

Tri tri_and(Tri a, Tri b) {
    if (a == Tri::F || b == Tri::F) return Tri::F;
    if (a == Tri::T && b == Tri::T) return Tri::T;
    return Tri::X;
}

Tri tri_or(Tri a, Tri b) {
    if (a == Tri::T || b == Tri::T) return Tri::T;
    if (a == Tri::F && b == Tri::F) return Tri::F;
    return Tri::X;
}

Tri tri_xor(Tri a, Tri b) {
    if (a == Tri::X || b == Tri::X) return Tri::X;
    return a == b ? Tri::F : Tri::T;
}

Tri tri_not(Tri a) {
    if (a == Tri::X) return Tri::X;
    return a == Tri::F ? Tri::T : Tri::F;
}

Tri tri_mux(Tri a, Tri b, Tri s) {
    if (s == Tri::F) return a;
    if (s == Tri::T) return b;
    return a == b && a != Tri::X ? a : Tri::X;
}

namespace {

Tri merge_unknown(Tri a, Tri b) { return a == b ? a : Tri::X; }

} // namespace

Simulator::Simulator(const Netlist& nl) : nl_(nl) {
    const Module& m = nl.top_module();
    for (const auto& [pname, p] : m.ports)
        if (p.direction == PortDirection::Inout)
            throw Error("simulation: inout port \"" + pname + "\" unsupported (tristates out of scope)");

    for (const auto& b : nl.net_universe()) max_net_ = std::max(max_net_, b);

    // Kahn topological sort of combinational cells; sequential cells break
    // the dependency chain at their Q outputs.
    std::map<std::string, std::size_t> indegree;
    std::map<std::int64_t, std::vector<std::string>> consumers; // net -> comb cells reading it
    for (const auto& [name, c] : m.cells) {
        if (is_sequential(c.kind)) {
            seq_cells_.push_back(name);
            continue;
        }
        indegree[name] = 0;
        for (const auto& [r, bits] : c.connections)
            if (!is_output_role(r))
                for (const auto& b : bits)
                    if (b.is_net()) consumers[b.net].push_back(name);
    }
    for (auto& [net, cells] : consumers) {
        Driver d = nl.drivers_of(BitRef::make_net(net));
        if (d.kind != Driver::Kind::CellOutput) continue;
        if (is_sequential(m.cells.at(d.cell).kind)) continue;
        for (const auto& reader : cells) ++indegree[reader];
    }
    std::deque<std::string> ready;
    for (const auto& [name, deg] : indegree)
        if (deg == 0) ready.push_back(name);
    while (!ready.empty()) {
        std::string name = ready.front();
        ready.pop_front();
        topo_order_.push_back(name);
        const Cell& c = m.cells.at(name);
        for (const auto& [r, bits] : c.connections) {
            if (!is_output_role(r)) continue;
            for (const auto& b : bits) {
                if (!b.is_net()) continue;
                auto it = consumers.find(b.net);
                if (it == consumers.end()) continue;
                for (const auto& reader : it->second)
                    if (--indegree[reader] == 0) ready.push_back(reader);
            }
        }
    }
    if (topo_order_.size() != indegree.size())
        throw Error("simulation: combinational loop in module " + nl.top);
}

SimState Simulator::initial_state() const {
    SimState s;
    const Module& m = nl_.top_module();
    for (const auto& name : seq_cells_) {
        const Cell& c = m.cells.at(name);
        s.regs[name].assign(c.width(), Tri::X);
        s.prev_clk[name] = Tri::X;
    }
    return s;
}

SimState Simulator::reset_state() const {
    SimState s;
    const Module& m = nl_.top_module();
    for (const auto& name : seq_cells_) {
        const Cell& c = m.cells.at(name);
        s.regs[name].assign(c.width(), Tri::F);
        s.prev_clk[name] = Tri::F;
    }
    return s;
}

std::vector<std::string> Simulator::input_ports() const {
    std::vector<std::string> out;
    for (const auto& [pname, p] : nl_.top_module().ports)
        if (p.direction == PortDirection::Input) out.push_back(pname);
    return out;
}

std::vector<std::string> Simulator::output_ports() const {
    std::vector<std::string> out;
    for (const auto& [pname, p] : nl_.top_module().ports)
        if (p.direction == PortDirection::Output) out.push_back(pname);
    return out;
}

std::size_t Simulator::total_input_bits() const {
    std::size_t n = 0;
    for (const auto& [pname, p] : nl_.top_module().ports)
        if (p.direction == PortDirection::Input) n += p.bits.size();
    return n;
}

Tri Simulator::value_of(const std::vector<Tri>& nets, const BitRef& b) const {
    switch (b.kind) {
        case BitRef::Kind::Zero: return Tri::F;
        case BitRef::Kind::One: return Tri::T;
        case BitRef::Kind::X: return Tri::X;
        case BitRef::Kind::Net: return nets[static_cast<std::size_t>(b.net)];
    }
    return Tri::X;
}

CycleResult Simulator::cycle(const SimState& state, const InputMap& inputs) const {
    const Module& m = nl_.top_module();
    std::vector<Tri> nets(static_cast<std::size_t>(max_net_) + 1, Tri::X);

    for (const auto& [pname, p] : m.ports) {
        if (p.direction != PortDirection::Input) continue;
        auto it = inputs.find(pname);
        if (it == inputs.end())
            throw Error("simulation: input port \"" + pname + "\" not assigned");
        if (it->second.size() != p.bits.size())
            throw Error("simulation: input port \"" + pname + "\" width mismatch");
        for (std::size_t i = 0; i < p.bits.size(); ++i)
            if (p.bits[i].is_net()) nets[static_cast<std::size_t>(p.bits[i].net)] = it->second[i];
    }
    for (const auto& name : seq_cells_) {
        const Cell& c = m.cells.at(name);
        const auto& q = c.conn(PortRole::Q);
        const auto& vals = state.regs.at(name);
        for (std::size_t i = 0; i < q.size(); ++i)
            if (q[i].is_net()) nets[static_cast<std::size_t>(q[i].net)] = vals[i];
    }

    for (const auto& name : topo_order_) {
        const Cell& c = m.cells.at(name);
        const std::size_t w = c.width();
        const auto& y = c.conn(PortRole::Y);
        for (std::size_t i = 0; i < w; ++i) {
            Tri out = Tri::X;
            switch (c.kind) {
                case CellKind::And:
                    out = tri_and(value_of(nets, c.conn(PortRole::A)[i]),
                                  value_of(nets, c.conn(PortRole::B)[i]));
                    break;
                case CellKind::Or:
                    out = tri_or(value_of(nets, c.conn(PortRole::A)[i]),
                                 value_of(nets, c.conn(PortRole::B)[i]));
                    break;
                case CellKind::Xor:
                    out = tri_xor(value_of(nets, c.conn(PortRole::A)[i]),
                                  value_of(nets, c.conn(PortRole::B)[i]));
                    break;
                case CellKind::Not:
                    out = tri_not(value_of(nets, c.conn(PortRole::A)[i]));
                    break;
                case CellKind::Nand:
                    out = tri_not(tri_and(value_of(nets, c.conn(PortRole::A)[i]),
                                          value_of(nets, c.conn(PortRole::B)[i])));
                    break;
                case CellKind::Nor:
                    out = tri_not(tri_or(value_of(nets, c.conn(PortRole::A)[i]),
                                         value_of(nets, c.conn(PortRole::B)[i])));
                    break;
                case CellKind::Xnor:
                    out = tri_not(tri_xor(value_of(nets, c.conn(PortRole::A)[i]),
                                          value_of(nets, c.conn(PortRole::B)[i])));
                    break;
                case CellKind::Mux:
                    out = tri_mux(value_of(nets, c.conn(PortRole::A)[i]),
                                  value_of(nets, c.conn(PortRole::B)[i]),
                                  value_of(nets, c.conn(PortRole::S)[0]));
                    break;
                default:
                    throw Error("simulation: unexpected sequential cell in topo order");
            }
            if (y[i].is_net()) nets[static_cast<std::size_t>(y[i].net)] = out;
        }
    }

    CycleResult res;
    for (const auto& [pname, p] : m.ports) {
        if (p.direction != PortDirection::Output) continue;
        std::vector<Tri> vals;
        vals.reserve(p.bits.size());
        for (const auto& b : p.bits) vals.push_back(value_of(nets, b));
        res.outputs[pname] = std::move(vals);
    }

    res.next = state;
    for (const auto& name : seq_cells_) {
        const Cell& c = m.cells.at(name);
        const Tri clk_now = value_of(nets, c.conn(PortRole::CLK)[0]);
        const Tri clk_prev = state.prev_clk.at(name);
        const bool rising = clk_prev == Tri::F && clk_now == Tri::T;
        const auto& cur = state.regs.at(name);
        std::vector<Tri> next = cur;

        if (rising) {
            const auto& dbits = c.conn(PortRole::D);
            std::vector<Tri> captured(cur.size());
            for (std::size_t i = 0; i < cur.size(); ++i)
                captured[i] = value_of(nets, dbits[i]);
            switch (c.kind) {
                case CellKind::Dff:
                    next = captured;
                    break;
                case CellKind::Adff:
                    next = captured; // reset handled below
                    break;
                case CellKind::Dffe: {
                    const Tri en = value_of(nets, c.conn(PortRole::EN)[0]);
                    if (en == Tri::T) next = captured;
                    else if (en == Tri::X)
                        for (std::size_t i = 0; i < cur.size(); ++i)
                            next[i] = merge_unknown(captured[i], cur[i]);
                    break;
                }
                case CellKind::Sdff: {
                    const Tri srst = value_of(nets, c.conn(PortRole::SRST)[0]);
                    if (srst == Tri::T) next.assign(cur.size(), Tri::F);
                    else if (srst == Tri::F) next = captured;
                    else
                        for (std::size_t i = 0; i < cur.size(); ++i)
                            next[i] = merge_unknown(captured[i], Tri::F);
                    break;
                }
                default: break;
            }
        }
        if (c.kind == CellKind::Adff) {
            const Tri arst = value_of(nets, c.conn(PortRole::ARST)[0]);
            if (arst == Tri::T) next.assign(next.size(), Tri::F);
            else if (arst == Tri::X)
                for (auto& v : next) v = merge_unknown(v, Tri::F);
        }
        res.next.regs[name] = std::move(next);
        res.next.prev_clk[name] = clk_now;
    }
    return res;
}

// --- equivalence -------------------------------------------------------------

std::string EquivBudget::to_json() const {
    json j = {{"max_exhaustive_inputs", max_exhaustive_inputs},
              {"random_stimuli", random_stimuli},
              {"cycles", cycles},
              {"seed", seed}};
    return j.dump();
}

EquivBudget EquivBudget::from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw Error("equiv budget: malformed JSON");
    EquivBudget b;
    b.max_exhaustive_inputs = j.value("max_exhaustive_inputs", b.max_exhaustive_inputs);
    b.random_stimuli = j.value("random_stimuli", b.random_stimuli);
    b.cycles = j.value("cycles", b.cycles);
    b.seed = j.value("seed", b.seed);
    return b;
}

namespace {

// Interface comparison: input/output port names and widths must agree.
std::optional<std::string> interface_mismatch(const Netlist& a, const Netlist& b) {
    const Module& ma = a.top_module();
    const Module& mb = b.top_module();
    for (const auto* m : {&ma, &mb})
        for (const auto& [pn, p] : m->ports)
            if (p.direction == PortDirection::Inout)
                return "inout port \"" + pn + "\" unsupported";
    std::ostringstream diff;
    for (const auto& [pn, p] : ma.ports) {
        auto it = mb.ports.find(pn);
        if (it == mb.ports.end()) diff << "port \"" << pn << "\" missing in b; ";
        else if (it->second.direction != p.direction) diff << "port \"" << pn << "\" direction differs; ";
        else if (it->second.bits.size() != p.bits.size()) diff << "port \"" << pn << "\" width differs; ";
    }
    for (const auto& [pn, p] : mb.ports)
        if (!ma.ports.count(pn)) diff << "port \"" << pn << "\" missing in a; ";
    std::string s = diff.str();
    if (!s.empty()) return s.substr(0, s.size() - 2);
    return std::nullopt;
}

struct CompareOutcome {
    enum class Kind { Match, SawX, Mismatch } kind = Kind::Match;
    std::string port;
    std::size_t bit = 0;
    Tri va = Tri::X, vb = Tri::X;
};

CompareOutcome compare_outputs(const std::map<std::string, std::vector<Tri>>& oa,
                               const std::map<std::string, std::vector<Tri>>& ob) {
    for (const auto& [pn, va] : oa) {
        const auto& vb = ob.at(pn);
        for (std::size_t i = 0; i < va.size(); ++i) {
            if (va[i] == Tri::X || vb[i] == Tri::X)
                return {CompareOutcome::Kind::SawX, pn, i, va[i], vb[i]};
            if (va[i] != vb[i])
                return {CompareOutcome::Kind::Mismatch, pn, i, va[i], vb[i]};
        }
    }
    return {};
}

} // namespace

EquivVerdict check_equivalence(const Netlist& a, const Netlist& b, const EquivBudget& budget) {
    EquivVerdict v;
    if (auto diff = interface_mismatch(a, b)) {
        v.kind = EquivVerdict::Kind::Incomparable;
        v.reason = *diff;
        return v;
    }

    std::optional<Simulator> sa, sb;
    try {
        sa.emplace(a);
        sb.emplace(b);
    } catch (const Error& e) {
        v.kind = EquivVerdict::Kind::Incomparable;
        v.reason = e.what();
        return v;
    }

    const auto in_ports = sa->input_ports();
    const Module& ma = a.top_module();

    auto run_stimulus = [&](const Stimulus& st) -> CompareOutcome {
        // matched reset: both designs start with all registers cleared
        SimState qa = sa->reset_state();
        SimState qb = sb->reset_state();
        CompareOutcome last;
        for (std::size_t t = 0; t < st.cycles.size(); ++t) {
            CycleResult ra = sa->cycle(qa, st.cycles[t]);
            CycleResult rb = sb->cycle(qb, st.cycles[t]);
            CompareOutcome c = compare_outputs(ra.outputs, rb.outputs);
            if (c.kind != CompareOutcome::Kind::Match) {
                last = c;
                last.bit = c.bit;
                return last;
            }
            qa = std::move(ra.next);
            qb = std::move(rb.next);
        }
        return last;
    };

    std::vector<Stimulus> pending;
    const bool comb = sa->is_combinational() && sb->is_combinational();
    const std::size_t n_bits = sa->total_input_bits();

    if (comb && n_bits <= budget.max_exhaustive_inputs) {
        v.exhaustive = true;
        const std::uint64_t count = 1ull << n_bits;
        for (std::uint64_t val = 0; val < count; ++val) {
            Stimulus st;
            InputMap in;
            std::size_t pos = 0;
            for (const auto& pn : in_ports) {
                const auto& port = ma.ports.at(pn);
                std::vector<Tri> bits(port.bits.size());
                for (std::size_t i = 0; i < bits.size(); ++i)
                    bits[i] = ((val >> pos++) & 1) ? Tri::T : Tri::F;
                in[pn] = std::move(bits);
            }
            st.cycles.push_back(std::move(in));
            pending.push_back(std::move(st));
        }
    } else {
        DetRng rng(budget.seed);
        for (std::size_t r = 0; r < budget.random_stimuli; ++r) {
            Stimulus st;
            for (std::size_t t = 0; t < budget.cycles; ++t) {
                InputMap in;
                for (const auto& pn : in_ports) {
                    const auto& port = ma.ports.at(pn);
                    std::vector<Tri> bits(port.bits.size());
                    for (auto& bit : bits) bit = rng.coin() ? Tri::T : Tri::F;
                    in[pn] = std::move(bits);
                }
                st.cycles.push_back(std::move(in));
            }
            pending.push_back(std::move(st));
        }
    }

    for (auto& st : pending) {
        ++v.stimuli_run;
        CompareOutcome c = run_stimulus(st);
        if (c.kind == CompareOutcome::Kind::SawX) {
            ++v.skipped;
            continue;
        }
        if (c.kind == CompareOutcome::Kind::Mismatch) {
            v.kind = EquivVerdict::Kind::Counterexample;
            Counterexample cex;
            cex.stimulus = std::move(st);
            // run_stimulus stopped at the mismatching cycle; find it again
            // for the recorded index by replaying up to the mismatch.
            SimState qa = sa->reset_state(), qb = sb->reset_state();
            for (std::size_t t = 0; t < cex.stimulus.cycles.size(); ++t) {
                CycleResult ra = sa->cycle(qa, cex.stimulus.cycles[t]);
                CycleResult rb = sb->cycle(qb, cex.stimulus.cycles[t]);
                CompareOutcome cc = compare_outputs(ra.outputs, rb.outputs);
                if (cc.kind == CompareOutcome::Kind::Mismatch) {
                    cex.cycle = t;
                    cex.output_port = cc.port;
                    cex.bit_index = cc.bit;
                    cex.value_a = cc.va;
                    cex.value_b = cc.vb;
                    cex.stimulus.cycles.resize(t + 1);
                    break;
                }
                qa = std::move(ra.next);
                qb = std::move(rb.next);
            }
            v.cex = std::move(cex);
            return v;
        }
    }

    if (v.stimuli_run == 0 || v.skipped * 2 > v.stimuli_run) {
        v.kind = EquivVerdict::Kind::Incomparable;
        v.reason = "X-dominated: " + std::to_string(v.skipped) + "/" +
                   std::to_string(v.stimuli_run) + " stimuli skipped";
        return v;
    }
    v.kind = EquivVerdict::Kind::EquivalentBounded;
    return v;
}

bool replay_counterexample(const Netlist& a, const Netlist& b, const Counterexample& cex) {
    Simulator sa(a), sb(b);
    SimState qa = sa.reset_state(), qb = sb.reset_state();
    for (std::size_t t = 0; t < cex.stimulus.cycles.size(); ++t) {
        CycleResult ra = sa.cycle(qa, cex.stimulus.cycles[t]);
        CycleResult rb = sb.cycle(qb, cex.stimulus.cycles[t]);
        if (t == cex.cycle) {
            const auto& va = ra.outputs.at(cex.output_port);
            const auto& vb = rb.outputs.at(cex.output_port);
            return va[cex.bit_index] == cex.value_a && vb[cex.bit_index] == cex.value_b &&
                   cex.value_a != cex.value_b && cex.value_a != Tri::X && cex.value_b != Tri::X;
        }
        qa = std::move(ra.next);
        qb = std::move(rb.next);
    }
    return false;
}

namespace {

json stimulus_to_json(const Stimulus& st) {
    json cycles = json::array();
    for (const auto& in : st.cycles) {
        json jm = json::object();
        for (const auto& [pn, bits] : in) {
            std::string s;
            for (Tri t : bits) s.push_back(tri_char(t));
            jm[pn] = s; // LSB first
        }
        cycles.push_back(jm);
    }
    return cycles;
}

} // namespace

std::string verdict_json(const EquivVerdict& v) {
    json root;
    switch (v.kind) {
        case EquivVerdict::Kind::EquivalentBounded: root["verdict"] = "EQUIVALENT_BOUNDED"; break;
        case EquivVerdict::Kind::Counterexample: root["verdict"] = "COUNTEREXAMPLE"; break;
        case EquivVerdict::Kind::Incomparable: root["verdict"] = "INCOMPARABLE"; break;
    }
    root["stimuli_run"] = v.stimuli_run;
    root["skipped"] = v.skipped;
    root["exhaustive"] = v.exhaustive;
    if (!v.reason.empty()) root["reason"] = v.reason;
    if (v.cex) {
        root["counterexample"] = {{"cycle", v.cex->cycle},
                                  {"output_port", v.cex->output_port},
                                  {"bit_index", v.cex->bit_index},
                                  {"value_a", std::string(1, tri_char(v.cex->value_a))},
                                  {"value_b", std::string(1, tri_char(v.cex->value_b))},
                                  {"stimulus", stimulus_to_json(v.cex->stimulus)}};
    }
    return root.dump(2) + "\n";
}

std::string verdict_text(const EquivVerdict& v) {
    std::ostringstream ss;
    switch (v.kind) {
        case EquivVerdict::Kind::EquivalentBounded:
            ss << "equivalence: EQUIVALENT_BOUNDED (" << v.stimuli_run << " stimuli, "
               << v.skipped << " skipped" << (v.exhaustive ? ", exhaustive" : "") << ")";
            break;
        case EquivVerdict::Kind::Counterexample: {
            ss << "equivalence: COUNTEREXAMPLE at cycle " << v.cex->cycle << ", output "
               << v.cex->output_port << "[" << v.cex->bit_index << "]: "
               << tri_char(v.cex->value_a) << " vs " << tri_char(v.cex->value_b)
               << "; inputs:";
            for (std::size_t t = 0; t < v.cex->stimulus.cycles.size(); ++t) {
                ss << " cycle" << t << "{";
                bool first = true;
                for (const auto& [pn, bits] : v.cex->stimulus.cycles[t]) {
                    if (!first) ss << ",";
                    first = false;
                    ss << pn << "=";
                    for (Tri b : bits) ss << tri_char(b);
                }
                ss << "}";
            }
            break;
        }
        case EquivVerdict::Kind::Incomparable:
            ss << "equivalence: INCOMPARABLE (" << v.reason << ")";
            break;
    }
    ss << "\n";
    return ss.str();
}

} // namespace dftforge
