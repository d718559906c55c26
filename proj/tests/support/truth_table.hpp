#pragma once

// Brute-force combinational oracle: evaluates each output bit by recursive
// descent over the driver graph with memoization, binary domain only. This is
// the independent route used to validate the simulator's exhaustive mode.

#include <map>
#include <string>
#include <vector>

#include "dftforge/netlist.hpp"

namespace truth_table {

using dftforge::BitRef;
using dftforge::Cell;
using dftforge::CellKind;
using dftforge::Netlist;
using dftforge::PortRole;

struct Evaluator {
    const Netlist& nl;
    std::map<std::int64_t, bool> values; // assigned inputs + memoized nets

    explicit Evaluator(const Netlist& netlist) : nl(netlist) {}

    bool eval_bit(const BitRef& b) {
        if (b.kind == BitRef::Kind::Zero) return false;
        if (b.kind == BitRef::Kind::One) return true;
        if (b.kind == BitRef::Kind::X)
            throw dftforge::Error("truth-table oracle: x constant in a binary-only fixture");
        auto it = values.find(b.net);
        if (it != values.end()) return it->second;

        dftforge::Driver d = nl.drivers_of(b);
        if (d.kind != dftforge::Driver::Kind::CellOutput)
            throw dftforge::Error("truth-table oracle: unassigned bit " + b.str());
        const Cell& c = nl.top_module().cells.at(d.cell);

        std::size_t lane = 0;
        const auto& ybits = c.conn(PortRole::Y);
        for (std::size_t i = 0; i < ybits.size(); ++i)
            if (ybits[i] == b) lane = i;

        auto in = [&](PortRole r, std::size_t i) { return eval_bit(c.conn(r)[i]); };
        bool out = false;
        switch (c.kind) {
            case CellKind::And: out = in(PortRole::A, lane) && in(PortRole::B, lane); break;
            case CellKind::Or: out = in(PortRole::A, lane) || in(PortRole::B, lane); break;
            case CellKind::Xor: out = in(PortRole::A, lane) != in(PortRole::B, lane); break;
            case CellKind::Not: out = !in(PortRole::A, lane); break;
            case CellKind::Nand: out = !(in(PortRole::A, lane) && in(PortRole::B, lane)); break;
            case CellKind::Nor: out = !(in(PortRole::A, lane) || in(PortRole::B, lane)); break;
            case CellKind::Xnor: out = in(PortRole::A, lane) == in(PortRole::B, lane); break;
            case CellKind::Mux:
                out = in(PortRole::S, 0) ? in(PortRole::B, lane) : in(PortRole::A, lane);
                break;
            default:
                throw dftforge::Error("truth-table oracle: sequential cell in combinational fixture");
        }
        values[b.net] = out;
        return out;
    }
};

// Outputs for one exhaustive input row, 0/1 per bit. `assignment` packs all
// input-port bits in sorted port order, LSB first within each port.
inline std::map<std::string, std::vector<int>> evaluate(const Netlist& nl,
                                                        std::uint64_t assignment) {
    Evaluator ev(nl);
    std::size_t pos = 0;
    for (const auto& [pname, p] : nl.top_module().ports) {
        if (p.direction != dftforge::PortDirection::Input) continue;
        for (const auto& b : p.bits) {
            if (b.is_net()) ev.values[b.net] = ((assignment >> pos) & 1) != 0;
            ++pos;
        }
    }
    std::map<std::string, std::vector<int>> out;
    for (const auto& [pname, p] : nl.top_module().ports) {
        if (p.direction != dftforge::PortDirection::Output) continue;
        std::vector<int> bits;
        for (const auto& b : p.bits) bits.push_back(ev.eval_bit(b) ? 1 : 0);
        out[pname] = bits;
    }
    return out;
}

} // namespace truth_table
