#pragma once

#include <array>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dftforge/netlist.hpp"

namespace dftforge {

// The four violation classes. Ordinals are fixed: they define the bit
// position in the label vector and never change.
//   ACNCPI = 1  async set/reset not controllable from primary inputs
//   CLKNPI = 2  internally generated clock domain
//   CDFDAT = 3  clock signal consumed on a data path
//   FFCKNP = 4  flip-flop output driving a clock pin
enum class DftErrorKind : std::uint8_t { ACNCPI = 1, CLKNPI = 2, CDFDAT = 3, FFCKNP = 4 };

const char* dft_error_kind_name(DftErrorKind k);
std::optional<DftErrorKind> dft_error_kind_from(const std::string& name);

struct Violation {
    DftErrorKind kind;
    std::string cell;
    BitRef bit;
    std::string explanation; // human-readable trace of the offending path
};

struct LabelVector {
    std::array<int, 4> y{0, 0, 0, 0}; // y[ordinal-1]

    int& operator[](DftErrorKind k) { return y[static_cast<int>(k) - 1]; }
    int operator[](DftErrorKind k) const { return y[static_cast<int>(k) - 1]; }
    bool clean() const { return y == std::array<int, 4>{0, 0, 0, 0}; }
    int bits_set() const { return y[0] + y[1] + y[2] + y[3]; }
    bool operator==(const LabelVector& o) const { return y == o.y; }
};

// NOTE on semantics: the four detectors below are a reconstruction from the
// violation-class names; the commercial lint engine that coined them does not
// publish exact rules. The intended reading of each rule is documented at the
// implementation.

std::set<std::int64_t> collect_clock_bits(const Netlist& nl);

std::vector<Violation> check_acncpi(const Netlist& nl);
std::vector<Violation> check_clknpi(const Netlist& nl);
std::vector<Violation> check_cdfdat(const Netlist& nl);
std::vector<Violation> check_ffcknp(const Netlist& nl);

struct LintResult {
    std::vector<Violation> violations; // ordered by kind ordinal, then cell name
    LabelVector label;
};

LintResult lint(const Netlist& nl);

// Corpus label collapse. A derived clock that is itself flagged as FFCKNP or
// CDFDAT also trips CLKNPI by construction; for single-violation labeling the
// specific pattern wins (priority FFCKNP > CDFDAT > CLKNPI > ACNCPI). If two
// unrelated kinds remain after dropping the subsumed CLKNPI, the design is a
// genuine multi-violation case.
struct CollapseResult {
    enum class Status { Clean, Single, Multi } status = Status::Clean;
    DftErrorKind kind = DftErrorKind::ACNCPI; // valid iff Single
};
CollapseResult collapse_label(const LintResult& r);

// Serializations used by the CLI and as verbatim LLM feedback.
std::string lint_report_json(const LintResult& r);
std::string lint_report_text(const Netlist& nl, const LintResult& r);

} // namespace dftforge
