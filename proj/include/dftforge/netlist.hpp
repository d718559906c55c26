#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "dftforge/util.hpp"

namespace dftforge {

// One connection endpoint: either a net index or a constant literal.
// The JSON dialect encodes constants as the strings "0"/"1"/"x".
struct BitRef {
    enum class Kind : std::uint8_t { Net, Zero, One, X };
    Kind kind = Kind::Net;
    std::int64_t net = 0; // valid iff kind == Net

    static BitRef make_net(std::int64_t id) { return BitRef{Kind::Net, id}; }
    static BitRef zero() { return BitRef{Kind::Zero, 0}; }
    static BitRef one() { return BitRef{Kind::One, 0}; }
    static BitRef x() { return BitRef{Kind::X, 0}; }

    bool is_net() const { return kind == Kind::Net; }
    bool is_const() const { return kind != Kind::Net; }

    bool operator==(const BitRef& o) const { return kind == o.kind && net == o.net; }
    bool operator<(const BitRef& o) const {
        if (kind != o.kind) return kind < o.kind;
        return net < o.net;
    }
    std::string str() const;
};

enum class CellKind : std::uint8_t {
    And, Or, Xor, Not, Nand, Nor, Xnor, Mux, Dff, Adff, Dffe, Sdff
};

const char* cell_kind_name(CellKind k);           // "$and", "$dff", ...
std::optional<CellKind> cell_kind_from(const std::string& type);
bool is_sequential(CellKind k);

enum class PortRole : std::uint8_t { A, B, S, Y, D, Q, CLK, ARST, EN, SRST };

const char* port_role_name(PortRole r);
std::optional<PortRole> port_role_from(const std::string& name);
bool is_output_role(PortRole r); // Y and Q drive nets; everything else consumes

struct Cell {
    std::string name;
    CellKind kind = CellKind::And;
    std::map<PortRole, std::vector<BitRef>> connections;
    std::map<std::string, std::string> attrs;

    const std::vector<BitRef>& conn(PortRole r) const;
    std::size_t width() const; // width of the data ports (Y for gates, Q for flops)
};

enum class PortDirection : std::uint8_t { Input, Output, Inout };

struct Port {
    std::string name;
    PortDirection direction = PortDirection::Input;
    std::vector<BitRef> bits;
};

struct Module {
    std::string name;
    std::map<std::string, Port> ports;
    std::map<std::string, Cell> cells;
};

// Who drives a bit. Exactly one of these holds for every declared bit.
struct Driver {
    enum class Kind : std::uint8_t { CellOutput, PrimaryInput, Constant, Undriven };
    Kind kind = Kind::Undriven;
    std::string cell;          // CellOutput
    PortRole role = PortRole::Y; // CellOutput
    std::string port;          // PrimaryInput: the input port name
};

// Terminal reached by a backward combinational traversal.
struct ConeSource {
    enum class Kind : std::uint8_t { PrimaryInput, SequentialOutput, Constant, CombLoop, Undriven };
    Kind kind = Kind::PrimaryInput;
    BitRef bit;        // the terminal bit
    std::string name;  // port name (PrimaryInput) or cell name (SequentialOutput / CombLoop)

    bool operator<(const ConeSource& o) const {
        if (kind != o.kind) return kind < o.kind;
        if (!(bit == o.bit)) return bit < o.bit;
        return name < o.name;
    }
    bool operator==(const ConeSource& o) const {
        return kind == o.kind && bit == o.bit && name == o.name;
    }
    std::string str() const;
};

// Flat validated netlist. Immutable after parse; the lookup tables below are
// built once so any number of analysis threads can read concurrently.
class Netlist {
public:
    std::map<std::string, Module> modules;
    std::string top;

    const Module& top_module() const;

    // Every net index referenced by any port or cell connection.
    const std::set<std::int64_t>& net_universe() const { return nets_; }

    Driver drivers_of(const BitRef& bit) const;
    bool is_primary_input_bit(const BitRef& bit) const;

    // Backward BFS over combinational cells only; stops at flops, primary
    // inputs, constants and combinational loops. Result sorted.
    std::vector<ConeSource> comb_fanin_cone(const BitRef& bit) const;

    std::vector<std::string> sequential_cells() const; // sorted by name
    std::size_t cell_count() const { return top_module().cells.size(); }

    void build_tables(); // called by the parser after validation

private:
    std::set<std::int64_t> nets_;
    std::unordered_map<std::int64_t, Driver> driver_;
    std::set<std::int64_t> pi_bits_;
};

// Parse the JSON netlist dialect (subset of Yosys write_json), inline any
// submodule instances and validate the flattened result. Throws Error with
// module/cell path context on malformed input.
Netlist parse_netlist(const std::string& json_text);

// Serialize back into the same dialect. parse(serialize(parse(x))) is
// graph-isomorphic to parse(x).
std::string serialize_netlist(const Netlist& nl);

} // namespace dftforge
