#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dftforge/netlist.hpp"

namespace dftforge {

// Ternary logic value. X propagates unless a controlling value decides the
// output (AND with a 0, OR with a 1, matched mux legs).
enum class Tri : std::uint8_t { F = 0, T = 1, X = 2 };

char tri_char(Tri v);
Tri tri_and(Tri a, Tri b);
Tri tri_or(Tri a, Tri b);
Tri tri_xor(Tri a, Tri b);
Tri tri_not(Tri a);
Tri tri_mux(Tri a, Tri b, Tri s); // s ? b : a

// One cycle's worth of input: value per primary-input port, LSB-first.
using InputMap = std::map<std::string, std::vector<Tri>>;

struct SimState {
    std::map<std::string, std::vector<Tri>> regs; // per sequential cell, Q value
    std::map<std::string, Tri> prev_clk;          // per sequential cell, last clock sample
};

struct CycleResult {
    SimState next;
    std::map<std::string, std::vector<Tri>> outputs; // per output port
};

// Cycle-based two-phase simulator: combinational settle with the current
// register values, outputs sampled, then flops update. A flop captures only
// on an unambiguous 0->1 of its clock bit relative to the previous cycle;
// an asserted ADFF reset dominates the edge (X reset makes Q unknown).
// Flops reset/clear to 0 (reset-value parameters are out of scope).
class Simulator {
public:
    explicit Simulator(const Netlist& nl); // throws Error on combinational loops

    SimState initial_state() const; // registers X, previous clock X (honest power-up)
    SimState reset_state() const;   // registers 0, previous clock 0 (matched reset)

    CycleResult cycle(const SimState& state, const InputMap& inputs) const;

    std::vector<std::string> input_ports() const;  // sorted
    std::vector<std::string> output_ports() const; // sorted
    std::size_t total_input_bits() const;
    bool is_combinational() const { return seq_cells_.empty(); }

private:
    const Netlist& nl_;
    std::vector<std::string> topo_order_; // combinational cells, ready order
    std::vector<std::string> seq_cells_;
    std::int64_t max_net_ = 0;

    Tri value_of(const std::vector<Tri>& nets, const BitRef& b) const;
};

struct EquivBudget {
    std::size_t max_exhaustive_inputs = 16; // exhaustive when comb and <= this
    std::size_t random_stimuli = 1024;      // R
    std::size_t cycles = 32;                // T
    std::uint64_t seed = 1;

    std::string to_json() const;
    static EquivBudget from_json(const std::string& text);
};

// A stimulus is one input sequence: per cycle, per input port, a bit vector.
struct Stimulus {
    std::vector<InputMap> cycles;
};

struct Counterexample {
    Stimulus stimulus;
    std::size_t cycle = 0;
    std::string output_port;
    std::size_t bit_index = 0;
    Tri value_a = Tri::X, value_b = Tri::X;
};

struct EquivVerdict {
    enum class Kind { EquivalentBounded, Counterexample, Incomparable };
    Kind kind = Kind::EquivalentBounded;
    std::optional<Counterexample> cex;
    std::string reason;          // Incomparable only
    std::size_t stimuli_run = 0;
    std::size_t skipped = 0;     // stimuli skipped because an output was X
    bool exhaustive = false;
};

// Bounded equivalence: exhaustive input enumeration for small combinational
// designs, otherwise seeded random stimuli over multiple cycles from matched
// reset. Only primary outputs are compared, under identical primary-input
// stimuli. Never claims more than EQUIVALENT_BOUNDED.
EquivVerdict check_equivalence(const Netlist& a, const Netlist& b, const EquivBudget& budget);

// Re-simulates a counterexample; true iff the recorded mismatch reproduces.
bool replay_counterexample(const Netlist& a, const Netlist& b, const Counterexample& cex);

std::string verdict_json(const EquivVerdict& v);
std::string verdict_text(const EquivVerdict& v);

} // namespace dftforge
