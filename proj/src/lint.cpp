#include "dftforge/lint.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"

using nlohmann::json;

namespace dftforge {

const char* dft_error_kind_name(DftErrorKind k) {
    switch (k) {
        case DftErrorKind::ACNCPI: return "ACNCPI";
        case DftErrorKind::CLKNPI: return "CLKNPI";
        case DftErrorKind::CDFDAT: return "CDFDAT";
        case DftErrorKind::FFCKNP: return "FFCKNP";
    }
    return "?";
}

std::optional<DftErrorKind> dft_error_kind_from(const std::string& name) {
    for (DftErrorKind k : {DftErrorKind::ACNCPI, DftErrorKind::CLKNPI,
                           DftErrorKind::CDFDAT, DftErrorKind::FFCKNP})
        if (name == dft_error_kind_name(k)) return k;
    return std::nullopt;
}

namespace {

std::string cone_summary(const std::vector<ConeSource>& cone) {
    std::ostringstream ss;
    for (std::size_t i = 0; i < cone.size(); ++i) {
        if (i) ss << ", ";
        ss << cone[i].str();
    }
    return ss.str();
}

bool cone_has(const std::vector<ConeSource>& cone, ConeSource::Kind k) {
    return std::any_of(cone.begin(), cone.end(),
                       [&](const ConeSource& s) { return s.kind == k; });
}

std::string with_src(const Cell& c, const std::string& text) {
    auto it = c.attrs.find("src");
    if (it == c.attrs.end()) return text;
    return text + " (" + it->second + ")";
}

} // namespace

std::set<std::int64_t> collect_clock_bits(const Netlist& nl) {
    std::set<std::int64_t> out;
    const Module& m = nl.top_module();
    for (const auto& [name, c] : m.cells) {
        if (!is_sequential(c.kind)) continue;
        const BitRef& clk = c.conn(PortRole::CLK)[0];
        if (clk.is_net()) out.insert(clk.net);
    }
    return out;
}

// ACNCPI: an asynchronous reset pin whose combinational fan-in cone contains
// no primary input cannot be exercised from the chip boundary. Synchronous
// resets (SDFF SRST) are data pins and are not checked here.
std::vector<Violation> check_acncpi(const Netlist& nl) {
    std::vector<Violation> out;
    const Module& m = nl.top_module();
    for (const auto& [name, c] : m.cells) {
        if (c.kind != CellKind::Adff) continue;
        const BitRef& arst = c.conn(PortRole::ARST)[0];
        auto cone = nl.comb_fanin_cone(arst);
        if (cone_has(cone, ConeSource::Kind::PrimaryInput)) continue;
        Violation v;
        v.kind = DftErrorKind::ACNCPI;
        v.cell = name;
        v.bit = arst;
        v.explanation = with_src(
            c, "async reset of " + name + " (bit " + arst.str() +
                   ") unreachable from primary inputs; cone: " + cone_summary(cone));
        out.push_back(std::move(v));
    }
    return out;
}

// CLKNPI: a clock pin not wired straight to a primary input. Constant clocks
// count (untestable domain); an undriven clock is reported by nothing here.
std::vector<Violation> check_clknpi(const Netlist& nl) {
    std::vector<Violation> out;
    const Module& m = nl.top_module();
    for (const auto& [name, c] : m.cells) {
        if (!is_sequential(c.kind)) continue;
        const BitRef& clk = c.conn(PortRole::CLK)[0];
        if (nl.is_primary_input_bit(clk)) continue;
        Driver d = nl.drivers_of(clk);
        std::string why;
        if (d.kind == Driver::Kind::Constant) {
            why = "clock tied to constant " + clk.str();
        } else if (d.kind == Driver::Kind::CellOutput) {
            const Cell& drv = m.cells.at(d.cell);
            why = is_sequential(drv.kind)
                      ? "clock generated by flop " + d.cell
                      : "clock generated by combinational cell " + d.cell;
        } else {
            continue; // undriven: nothing generates it internally
        }
        Violation v;
        v.kind = DftErrorKind::CLKNPI;
        v.cell = name;
        v.bit = clk;
        v.explanation = with_src(c, "clock of " + name + " (bit " + clk.str() +
                                        ") is not a primary input: " + why);
        out.push_back(std::move(v));
    }
    return out;
}

// CDFDAT: a bit that clocks some flop also feeds a data-role pin somewhere.
// One report per (clock bit, consuming cell).
std::vector<Violation> check_cdfdat(const Netlist& nl) {
    std::vector<Violation> out;
    const Module& m = nl.top_module();
    std::set<std::int64_t> clocks = collect_clock_bits(nl);
    std::set<std::pair<std::int64_t, std::string>> reported;
    for (const auto& [name, c] : m.cells) {
        for (const auto& [role, bits] : c.connections) {
            if (is_output_role(role) || role == PortRole::CLK) continue;
            for (const auto& b : bits) {
                if (!b.is_net() || !clocks.count(b.net)) continue;
                if (!reported.insert({b.net, name}).second) continue;
                Violation v;
                v.kind = DftErrorKind::CDFDAT;
                v.cell = name;
                v.bit = b;
                v.explanation = with_src(
                    c, "clock bit " + b.str() + " consumed as data on port " +
                           port_role_name(role) + " of " + name);
                out.push_back(std::move(v));
            }
        }
    }
    return out;
}

// FFCKNP: a flop output reaches a clock pin, directly or through
// combinational logic. Reported at the clocked cell.
std::vector<Violation> check_ffcknp(const Netlist& nl) {
    std::vector<Violation> out;
    const Module& m = nl.top_module();
    for (const auto& [name, c] : m.cells) {
        if (!is_sequential(c.kind)) continue;
        const BitRef& clk = c.conn(PortRole::CLK)[0];
        std::string path;
        Driver d = clk.is_net() ? nl.drivers_of(clk) : Driver{};
        if (clk.is_net() && d.kind == Driver::Kind::CellOutput) {
            const Cell& drv = m.cells.at(d.cell);
            if (is_sequential(drv.kind)) {
                path = "driven directly by flop " + d.cell;
            } else {
                auto cone = nl.comb_fanin_cone(clk);
                for (const auto& s : cone)
                    if (s.kind == ConeSource::Kind::SequentialOutput) {
                        path = "reached from flop " + s.name + " through combinational logic";
                        break;
                    }
            }
        }
        if (path.empty()) continue;
        Violation v;
        v.kind = DftErrorKind::FFCKNP;
        v.cell = name;
        v.bit = clk;
        v.explanation =
            with_src(c, "clock of " + name + " (bit " + clk.str() + ") " + path);
        out.push_back(std::move(v));
    }
    return out;
}

LintResult lint(const Netlist& nl) {
    LintResult r;
    auto append = [&](std::vector<Violation> vs) {
        std::sort(vs.begin(), vs.end(), [](const Violation& a, const Violation& b) {
            if (a.cell != b.cell) return a.cell < b.cell;
            return a.bit < b.bit;
        });
        for (auto& v : vs) r.violations.push_back(std::move(v));
    };
    append(check_acncpi(nl));
    append(check_clknpi(nl));
    append(check_cdfdat(nl));
    append(check_ffcknp(nl));
    for (const auto& v : r.violations) r.label[v.kind] = 1;
    return r;
}

CollapseResult collapse_label(const LintResult& r) {
    std::set<DftErrorKind> kinds;
    for (const auto& v : r.violations) kinds.insert(v.kind);
    if (kinds.count(DftErrorKind::FFCKNP) || kinds.count(DftErrorKind::CDFDAT))
        kinds.erase(DftErrorKind::CLKNPI);
    CollapseResult c;
    if (kinds.empty()) {
        c.status = CollapseResult::Status::Clean;
    } else if (kinds.size() == 1) {
        c.status = CollapseResult::Status::Single;
        c.kind = *kinds.begin();
    } else {
        c.status = CollapseResult::Status::Multi;
    }
    return c;
}

std::string lint_report_json(const LintResult& r) {
    json jv = json::array();
    for (const auto& v : r.violations) {
        jv.push_back({{"kind", dft_error_kind_name(v.kind)},
                      {"cell", v.cell},
                      {"bit", v.bit.str()},
                      {"explanation", v.explanation}});
    }
    json root = {{"violations", jv}, {"label", r.label.y}};
    return root.dump(2) + "\n";
}

std::string lint_report_text(const Netlist& nl, const LintResult& r) {
    std::ostringstream ss;
    if (r.violations.empty()) {
        ss << "DFT lint: module " << nl.top << " is clean (no violations).\n";
        return ss.str();
    }
    ss << "DFT lint report for module " << nl.top << ":\n";
    for (const auto& v : r.violations)
        ss << "  [" << dft_error_kind_name(v.kind) << "] cell " << v.cell << ": "
           << v.explanation << "\n";
    ss << "label: [" << r.label.y[0] << "," << r.label.y[1] << "," << r.label.y[2]
       << "," << r.label.y[3] << "]\n";
    return ss.str();
}

} // namespace dftforge
