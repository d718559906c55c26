#include "dftforge/netlist.hpp"

#include <algorithm>
#include <array>

#include "json.hpp"

using nlohmann::json;

namespace dftforge {

std::string BitRef::str() const {
    switch (kind) {
        case Kind::Net: return std::to_string(net);
        case Kind::Zero: return "0";
        case Kind::One: return "1";
        case Kind::X: return "x";
    }
    return "?";
}

namespace {

struct KindInfo {
    CellKind kind;
    const char* name;
    std::vector<PortRole> roles; // exactly these must be present
};

const std::vector<KindInfo>& kind_table() {
    using R = PortRole;
    static const std::vector<KindInfo> t = {
        {CellKind::And, "$and", {R::A, R::B, R::Y}},
        {CellKind::Or, "$or", {R::A, R::B, R::Y}},
        {CellKind::Xor, "$xor", {R::A, R::B, R::Y}},
        {CellKind::Not, "$not", {R::A, R::Y}},
        {CellKind::Nand, "$nand", {R::A, R::B, R::Y}},
        {CellKind::Nor, "$nor", {R::A, R::B, R::Y}},
        {CellKind::Xnor, "$xnor", {R::A, R::B, R::Y}},
        {CellKind::Mux, "$mux", {R::A, R::B, R::S, R::Y}},
        {CellKind::Dff, "$dff", {R::D, R::Q, R::CLK}},
        {CellKind::Adff, "$adff", {R::D, R::Q, R::CLK, R::ARST}},
        {CellKind::Dffe, "$dffe", {R::D, R::Q, R::CLK, R::EN}},
        {CellKind::Sdff, "$sdff", {R::D, R::Q, R::CLK, R::SRST}},
    };
    return t;
}

const KindInfo& kind_info(CellKind k) {
    for (const auto& e : kind_table())
        if (e.kind == k) return e;
    throw Error("internal: unknown cell kind");
}

// Control pins are single-bit; everything else is a data pin of the cell's width.
bool is_control_role(PortRole r) {
    return r == PortRole::S || r == PortRole::CLK || r == PortRole::ARST ||
           r == PortRole::EN || r == PortRole::SRST;
}

} // namespace

const char* cell_kind_name(CellKind k) { return kind_info(k).name; }

std::optional<CellKind> cell_kind_from(const std::string& type) {
    std::string t = type;
    if (!t.empty() && t[0] != '$') t = "$" + t;
    for (const auto& e : kind_table())
        if (t == e.name) return e.kind;
    return std::nullopt;
}

bool is_sequential(CellKind k) {
    return k == CellKind::Dff || k == CellKind::Adff || k == CellKind::Dffe ||
           k == CellKind::Sdff;
}

const char* port_role_name(PortRole r) {
    switch (r) {
        case PortRole::A: return "A";
        case PortRole::B: return "B";
        case PortRole::S: return "S";
        case PortRole::Y: return "Y";
        case PortRole::D: return "D";
        case PortRole::Q: return "Q";
        case PortRole::CLK: return "CLK";
        case PortRole::ARST: return "ARST";
        case PortRole::EN: return "EN";
        case PortRole::SRST: return "SRST";
    }
    return "?";
}

std::optional<PortRole> port_role_from(const std::string& name) {
    static const std::array<PortRole, 10> all = {
        PortRole::A, PortRole::B, PortRole::S, PortRole::Y, PortRole::D,
        PortRole::Q, PortRole::CLK, PortRole::ARST, PortRole::EN, PortRole::SRST};
    for (PortRole r : all)
        if (name == port_role_name(r)) return r;
    return std::nullopt;
}

bool is_output_role(PortRole r) { return r == PortRole::Y || r == PortRole::Q; }

const std::vector<BitRef>& Cell::conn(PortRole r) const {
    auto it = connections.find(r);
    if (it == connections.end())
        throw Error("cell " + name + ": missing port " + port_role_name(r));
    return it->second;
}

std::size_t Cell::width() const {
    PortRole data = is_sequential(kind) ? PortRole::Q : PortRole::Y;
    return conn(data).size();
}

std::string ConeSource::str() const {
    switch (kind) {
        case Kind::PrimaryInput: return "primary-input " + name + "[bit " + bit.str() + "]";
        case Kind::SequentialOutput: return "flop-output " + name + "[bit " + bit.str() + "]";
        case Kind::Constant: return "constant " + bit.str();
        case Kind::CombLoop: return "combinational-loop at " + name + "[bit " + bit.str() + "]";
        case Kind::Undriven: return "undriven bit " + bit.str();
    }
    return "?";
}

const Module& Netlist::top_module() const {
    auto it = modules.find(top);
    if (it == modules.end()) throw Error("top module not found: " + top);
    return it->second;
}

namespace {

// --- raw (pre-flattening) representation -----------------------------------

struct RawCell {
    std::string type;
    std::map<std::string, std::vector<BitRef>> connections;
    std::map<std::string, std::string> attrs;
};

struct RawModule {
    std::string name;
    std::map<std::string, Port> ports;
    std::map<std::string, RawCell> cells;
    bool top_attr = false;
};

BitRef parse_bit(const json& j, const std::string& where) {
    if (j.is_number_integer()) {
        std::int64_t v = j.get<std::int64_t>();
        if (v < 0) throw Error(where + ": negative net index " + std::to_string(v));
        return BitRef::make_net(v);
    }
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "0") return BitRef::zero();
        if (s == "1") return BitRef::one();
        if (s == "x" || s == "X") return BitRef::x();
        throw Error(where + ": bad bit literal \"" + s + "\" (expected \"0\", \"1\" or \"x\")");
    }
    throw Error(where + ": bit entries must be integers or constant strings");
}

std::vector<BitRef> parse_bits(const json& j, const std::string& where) {
    if (!j.is_array()) throw Error(where + ": expected array of bits");
    std::vector<BitRef> out;
    out.reserve(j.size());
    for (const auto& e : j) out.push_back(parse_bit(e, where));
    return out;
}

std::string attr_to_string(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    if (v.is_number()) return std::to_string(v.get<double>());
    if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
    return v.dump();
}

// Yosys renders numeric attributes as binary strings; "top" may arrive as
// 1, "1" or "000...001".
bool attr_is_one(const std::string& v) {
    if (v == "1") return true;
    if (v.empty()) return false;
    if (v.find_first_not_of("01") != std::string::npos) return false;
    std::size_t ones = std::count(v.begin(), v.end(), '1');
    return ones == 1 && v.back() == '1';
}

RawModule parse_raw_module(const std::string& name, const json& jm) {
    RawModule m;
    m.name = name;
    const std::string where = "module " + name;
    if (!jm.is_object()) throw Error(where + ": expected object");

    if (jm.contains("attributes") && jm["attributes"].is_object()) {
        auto it = jm["attributes"].find("top");
        if (it != jm["attributes"].end() && attr_is_one(attr_to_string(*it)))
            m.top_attr = true;
    }

    if (jm.contains("ports")) {
        if (!jm["ports"].is_object()) throw Error(where + ": \"ports\" must be an object");
        for (auto it = jm["ports"].begin(); it != jm["ports"].end(); ++it) {
            const json& jp = it.value();
            const std::string pw = where + ", port " + it.key();
            if (!jp.is_object()) throw Error(pw + ": expected object");
            Port p;
            p.name = it.key();
            if (!jp.contains("direction") || !jp["direction"].is_string())
                throw Error(pw + ": missing \"direction\"");
            const std::string dir = jp["direction"].get<std::string>();
            if (dir == "input") p.direction = PortDirection::Input;
            else if (dir == "output") p.direction = PortDirection::Output;
            else if (dir == "inout") p.direction = PortDirection::Inout;
            else throw Error(pw + ": bad direction \"" + dir + "\"");
            if (!jp.contains("bits")) throw Error(pw + ": missing \"bits\"");
            p.bits = parse_bits(jp["bits"], pw);
            if (p.bits.empty()) throw Error(pw + ": empty bit list");
            m.ports[p.name] = std::move(p);
        }
    }

    if (jm.contains("cells")) {
        if (!jm["cells"].is_object()) throw Error(where + ": \"cells\" must be an object");
        for (auto it = jm["cells"].begin(); it != jm["cells"].end(); ++it) {
            const json& jc = it.value();
            const std::string cw = where + ", cell " + it.key();
            if (!jc.is_object()) throw Error(cw + ": expected object");
            RawCell c;
            if (!jc.contains("type") || !jc["type"].is_string())
                throw Error(cw + ": missing \"type\"");
            c.type = jc["type"].get<std::string>();
            if (jc.contains("connections")) {
                if (!jc["connections"].is_object())
                    throw Error(cw + ": \"connections\" must be an object");
                for (auto pc = jc["connections"].begin(); pc != jc["connections"].end(); ++pc)
                    c.connections[pc.key()] = parse_bits(pc.value(), cw + ", port " + pc.key());
            }
            if (jc.contains("attributes") && jc["attributes"].is_object()) {
                for (auto ac = jc["attributes"].begin(); ac != jc["attributes"].end(); ++ac)
                    c.attrs[ac.key()] = attr_to_string(ac.value());
            }
            m.cells[it.key()] = std::move(c);
        }
    }
    return m;
}

// --- flattening -------------------------------------------------------------

class Flattener {
public:
    Flattener(const std::map<std::string, RawModule>& mods, std::int64_t first_free)
        : mods_(mods), next_(first_free) {}

    // Expands `mod` into `out`, remapping local nets through `bound` (local
    // net id -> parent bit). Unbound locals get fresh parent ids.
    void expand(const RawModule& mod, const std::string& prefix,
                std::map<std::int64_t, BitRef> bound, Module& out) {
        if (std::find(stack_.begin(), stack_.end(), mod.name) != stack_.end())
            throw Error("recursive instantiation of module " + mod.name);
        stack_.push_back(mod.name);

        auto map_bit = [&](const BitRef& b) -> BitRef {
            if (b.is_const()) return b;
            auto it = bound.find(b.net);
            if (it != bound.end()) return it->second;
            BitRef fresh = BitRef::make_net(next_++);
            bound.emplace(b.net, fresh);
            return fresh;
        };

        for (const auto& [cname, rc] : mod.cells) {
            const std::string flat_name = prefix.empty() ? cname : prefix + "." + cname;
            if (auto k = cell_kind_from(rc.type)) {
                Cell c;
                c.name = flat_name;
                c.kind = *k;
                c.attrs = rc.attrs;
                for (const auto& [pname, bits] : rc.connections) {
                    auto role = port_role_from(pname);
                    if (!role)
                        throw Error("cell " + flat_name + " (" + rc.type +
                                    "): unsupported port \"" + pname + "\"");
                    std::vector<BitRef> mapped;
                    mapped.reserve(bits.size());
                    for (const auto& b : bits) mapped.push_back(map_bit(b));
                    c.connections[*role] = std::move(mapped);
                }
                out.cells[flat_name] = std::move(c);
                continue;
            }
            auto sub = mods_.find(rc.type);
            if (sub == mods_.end())
                throw Error("cell " + flat_name + ": unknown cell kind \"" + rc.type + "\"");

            // Submodule instance: bind its port bits to the parent nets named
            // in the instance connections, then recurse.
            std::map<std::int64_t, BitRef> child_bound;
            for (const auto& [pname, port] : sub->second.ports) {
                auto conn = rc.connections.find(pname);
                if (conn == rc.connections.end())
                    throw Error("cell " + flat_name + ": instance leaves port \"" + pname +
                                "\" of module " + rc.type + " unconnected");
                if (conn->second.size() != port.bits.size())
                    throw Error("cell " + flat_name + ": width mismatch on port \"" + pname +
                                "\" (" + std::to_string(conn->second.size()) + " vs " +
                                std::to_string(port.bits.size()) + ")");
                for (std::size_t i = 0; i < port.bits.size(); ++i) {
                    if (port.bits[i].is_const())
                        throw Error("module " + rc.type + ", port " + pname +
                                    ": constant port bits are not supported on instanced modules");
                    BitRef parent = map_bit(conn->second[i]);
                    auto [it, inserted] = child_bound.emplace(port.bits[i].net, parent);
                    if (!inserted && !(it->second == parent))
                        throw Error("cell " + flat_name + ": port bit " +
                                    port.bits[i].str() + " bound twice with different nets");
                }
            }
            for (const auto& [pname, bits] : rc.connections)
                if (!sub->second.ports.count(pname))
                    throw Error("cell " + flat_name + ": module " + rc.type +
                                " has no port \"" + pname + "\"");
            expand(sub->second, flat_name, std::move(child_bound), out);
        }
        stack_.pop_back();
    }

private:
    const std::map<std::string, RawModule>& mods_;
    std::int64_t next_;
    std::vector<std::string> stack_;
};

void validate_flat(const Module& m) {
    // Per-cell structural checks.
    for (const auto& [name, c] : m.cells) {
        const KindInfo& info = kind_info(c.kind);
        for (PortRole r : info.roles)
            if (!c.connections.count(r))
                throw Error("cell " + name + " (" + std::string(cell_kind_name(c.kind)) +
                            "): missing required port " + port_role_name(r));
        for (const auto& [r, bits] : c.connections) {
            if (std::find(info.roles.begin(), info.roles.end(), r) == info.roles.end())
                throw Error("cell " + name + ": port " + port_role_name(r) +
                            " not valid for " + cell_kind_name(c.kind));
            if (bits.empty())
                throw Error("cell " + name + ": empty connection on port " + port_role_name(r));
            if (is_control_role(r) && bits.size() != 1)
                throw Error("cell " + name + ": control port " + port_role_name(r) +
                            " must be 1 bit wide");
        }
        std::size_t w = c.width();
        for (const auto& [r, bits] : c.connections) {
            if (is_control_role(r)) continue;
            if (bits.size() != w)
                throw Error("cell " + name + ": port " + port_role_name(r) + " width " +
                            std::to_string(bits.size()) + " != cell width " + std::to_string(w));
        }
    }

    // Single-driver rule over cell outputs, input ports and inout ports.
    std::map<std::int64_t, std::string> driver_desc;
    auto claim = [&](const BitRef& b, const std::string& what) {
        if (b.is_const())
            throw Error(what + ": constant in an output position");
        auto [it, inserted] = driver_desc.emplace(b.net, what);
        if (!inserted)
            throw Error("multi-driven bit " + b.str() + ": driven by " + it->second +
                        " and " + what);
    };
    for (const auto& [pname, p] : m.ports) {
        if (p.direction == PortDirection::Output) continue;
        for (const auto& b : p.bits)
            if (b.is_net()) claim(b, "input port " + pname);
    }
    for (const auto& [name, c] : m.cells)
        for (const auto& [r, bits] : c.connections)
            if (is_output_role(r))
                for (const auto& b : bits)
                    claim(b, "cell " + name + " port " + port_role_name(r));
}

} // namespace

void Netlist::build_tables() {
    const Module& m = top_module();
    nets_.clear();
    driver_.clear();
    pi_bits_.clear();

    for (const auto& [pname, p] : m.ports)
        for (const auto& b : p.bits)
            if (b.is_net()) nets_.insert(b.net);
    for (const auto& [cname, c] : m.cells)
        for (const auto& [r, bits] : c.connections)
            for (const auto& b : bits)
                if (b.is_net()) nets_.insert(b.net);

    for (const auto& [cname, c] : m.cells)
        for (const auto& [r, bits] : c.connections)
            if (is_output_role(r))
                for (const auto& b : bits)
                    if (b.is_net()) {
                        Driver d;
                        d.kind = Driver::Kind::CellOutput;
                        d.cell = cname;
                        d.role = r;
                        driver_[b.net] = d;
                    }
    // Port-driven bits win validation already guarantees no overlap.
    for (const auto& [pname, p] : m.ports) {
        if (p.direction == PortDirection::Output) continue;
        for (const auto& b : p.bits)
            if (b.is_net()) {
                Driver d;
                d.kind = Driver::Kind::PrimaryInput;
                d.port = pname;
                driver_[b.net] = d;
                pi_bits_.insert(b.net);
            }
    }
}

Driver Netlist::drivers_of(const BitRef& bit) const {
    if (bit.is_const()) {
        Driver d;
        d.kind = Driver::Kind::Constant;
        return d;
    }
    if (!nets_.count(bit.net))
        throw Error("unknown bit " + bit.str() + " in module " + top);
    auto it = driver_.find(bit.net);
    if (it == driver_.end()) {
        Driver d;
        d.kind = Driver::Kind::Undriven;
        return d;
    }
    return it->second;
}

bool Netlist::is_primary_input_bit(const BitRef& bit) const {
    return bit.is_net() && pi_bits_.count(bit.net) != 0;
}

std::vector<std::string> Netlist::sequential_cells() const {
    std::vector<std::string> out;
    for (const auto& [name, c] : top_module().cells)
        if (is_sequential(c.kind)) out.push_back(name);
    return out; // std::map iteration is already sorted
}

std::vector<ConeSource> Netlist::comb_fanin_cone(const BitRef& start) const {
    const Module& m = top_module();
    std::set<ConeSource> srcs;
    enum class VState : std::uint8_t { Gray, Black };
    std::map<std::int64_t, VState> state;

    struct Frame {
        std::int64_t net;
        std::vector<BitRef> inputs;
        std::size_t next = 0;
    };
    std::vector<Frame> stack;

    auto visit = [&](const BitRef& b) {
        if (b.is_const()) {
            srcs.insert({ConeSource::Kind::Constant, b, ""});
            return;
        }
        Driver d = drivers_of(b);
        switch (d.kind) {
            case Driver::Kind::PrimaryInput:
                srcs.insert({ConeSource::Kind::PrimaryInput, b, d.port});
                return;
            case Driver::Kind::Undriven:
                srcs.insert({ConeSource::Kind::Undriven, b, ""});
                return;
            case Driver::Kind::Constant:
                srcs.insert({ConeSource::Kind::Constant, b, ""});
                return;
            case Driver::Kind::CellOutput: {
                const Cell& c = m.cells.at(d.cell);
                if (is_sequential(c.kind)) {
                    srcs.insert({ConeSource::Kind::SequentialOutput, b, d.cell});
                    return;
                }
                auto st = state.find(b.net);
                if (st != state.end()) {
                    if (st->second == VState::Gray)
                        srcs.insert({ConeSource::Kind::CombLoop, b, d.cell});
                    return;
                }
                state[b.net] = VState::Gray;
                Frame f;
                f.net = b.net;
                for (const auto& [r, bits] : c.connections)
                    if (!is_output_role(r))
                        for (const auto& in : bits) f.inputs.push_back(in);
                stack.push_back(std::move(f));
                return;
            }
        }
    };

    visit(start);
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next < f.inputs.size()) {
            BitRef b = f.inputs[f.next++];
            visit(b);
        } else {
            state[f.net] = VState::Black;
            stack.pop_back();
        }
    }
    return std::vector<ConeSource>(srcs.begin(), srcs.end());
}

Netlist parse_netlist(const std::string& json_text) {
    json root = json::parse(json_text, nullptr, false);
    if (root.is_discarded()) throw Error("malformed JSON: not parseable");
    if (!root.is_object() || !root.contains("modules") || !root["modules"].is_object())
        throw Error("malformed JSON: missing top-level \"modules\" object");

    std::map<std::string, RawModule> raw;
    std::int64_t max_net = 1;
    for (auto it = root["modules"].begin(); it != root["modules"].end(); ++it) {
        RawModule m = parse_raw_module(it.key(), it.value());
        for (const auto& [pn, p] : m.ports)
            for (const auto& b : p.bits)
                if (b.is_net()) max_net = std::max(max_net, b.net);
        for (const auto& [cn, c] : m.cells)
            for (const auto& [pn, bits] : c.connections)
                for (const auto& b : bits)
                    if (b.is_net()) max_net = std::max(max_net, b.net);
        raw[it.key()] = std::move(m);
    }
    if (raw.empty()) throw Error("netlist contains no modules");

    // Top selection: explicit attribute wins, else the unique module nobody
    // instantiates.
    std::string top;
    for (const auto& [name, m] : raw)
        if (m.top_attr) {
            if (!top.empty()) throw Error("multiple modules carry the top attribute");
            top = name;
        }
    if (top.empty()) {
        std::set<std::string> instantiated;
        for (const auto& [name, m] : raw)
            for (const auto& [cn, c] : m.cells)
                if (!cell_kind_from(c.type) && raw.count(c.type))
                    instantiated.insert(c.type);
        std::vector<std::string> candidates;
        for (const auto& [name, m] : raw)
            if (!instantiated.count(name)) candidates.push_back(name);
        if (candidates.size() != 1)
            throw Error("cannot determine top module (" + std::to_string(candidates.size()) +
                        " candidates); set attribute top=1");
        top = candidates[0];
    }

    const RawModule& rtop = raw.at(top);
    Module flat;
    flat.name = top;
    flat.ports = rtop.ports;
    std::map<std::int64_t, BitRef> identity;
    for (const auto& [pn, p] : rtop.ports)
        for (const auto& b : p.bits)
            if (b.is_net()) identity.emplace(b.net, b);
    // Top-level internal nets keep their ids too.
    for (const auto& [cn, c] : rtop.cells)
        for (const auto& [pn, bits] : c.connections)
            for (const auto& b : bits)
                if (b.is_net()) identity.emplace(b.net, b);

    Flattener fl(raw, max_net + 1);
    fl.expand(rtop, "", std::move(identity), flat);
    validate_flat(flat);

    Netlist nl;
    nl.top = top;
    nl.modules[top] = std::move(flat);
    nl.build_tables();
    return nl;
}

std::string serialize_netlist(const Netlist& nl) {
    json jmods = json::object();
    for (const auto& [mname, m] : nl.modules) {
        json jm;
        jm["attributes"] = {{"top", mname == nl.top ? "1" : "0"}};
        json jports = json::object();
        for (const auto& [pname, p] : m.ports) {
            json bits = json::array();
            for (const auto& b : p.bits) {
                if (b.is_net()) bits.push_back(b.net);
                else bits.push_back(b.str());
            }
            const char* dir = p.direction == PortDirection::Input ? "input"
                              : p.direction == PortDirection::Output ? "output"
                                                                     : "inout";
            jports[pname] = {{"direction", dir}, {"bits", bits}};
        }
        jm["ports"] = jports;
        json jcells = json::object();
        for (const auto& [cname, c] : m.cells) {
            json conns = json::object();
            for (const auto& [r, cbits] : c.connections) {
                json bits = json::array();
                for (const auto& b : cbits) {
                    if (b.is_net()) bits.push_back(b.net);
                    else bits.push_back(b.str());
                }
                conns[port_role_name(r)] = bits;
            }
            json jc = {{"type", cell_kind_name(c.kind)}, {"connections", conns}};
            if (!c.attrs.empty()) {
                json ja = json::object();
                for (const auto& [k, v] : c.attrs) ja[k] = v;
                jc["attributes"] = ja;
            }
            jcells[cname] = jc;
        }
        jm["cells"] = jcells;
        jmods[mname] = jm;
    }
    json root = {{"modules", jmods}};
    return root.dump(2) + "\n";
}

} // namespace dftforge
