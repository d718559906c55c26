#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "dftforge/lint.hpp"
#include "dftforge/orchestrator.hpp"

namespace dftforge {

// One dataset design with its split assignment. Hashes pin file contents;
// loading with verification re-reads the files and hard-errors on drift.
struct ManifestEntry {
    std::string id;
    std::string source_path; // Verilog or JSON-native source
    std::string json_path;   // netlist JSON used for analysis
    std::array<int, 4> label{0, 0, 0, 0}; // exactly one bit set
    std::string split;       // "train" | "reference" | "test"
    std::string source_hash;
    std::string json_hash;
};

struct Manifest {
    std::vector<ManifestEntry> entries;

    std::string to_jsonl() const;
    static Manifest from_jsonl(const std::string& text);

    // Re-reads every referenced file and checks its hash.
    void verify_hashes() const;

    std::vector<const ManifestEntry*> split(const std::string& name) const;
};

enum class AdmissionVerdict {
    Admitted,
    NoLogic,          // zero cells after synthesis
    SynthFail,        // synthesis or netlist validation failed
    ZeroViolations,   // lints clean, nothing to repair
    MultiViolation,   // more than one independent violation kind
    UnsupportedErrorType // reserved: violation outside the four classes
};

const char* admission_verdict_name(AdmissionVerdict v);

struct AdmissionEntry {
    std::string id;
    std::string path;
    AdmissionVerdict verdict = AdmissionVerdict::SynthFail;
    std::optional<DftErrorKind> label; // set iff admitted
    std::string json_path;             // where the analyzed JSON lives
    std::string diagnostics;

    std::string to_json() const;
    static AdmissionEntry from_json(const std::string& text);
};

// Admission pipeline: synthesize (or bypass for JSON-native files), parse,
// reject no-logic designs, lint, collapse to the single corpus label.
// Synthesized JSON is written to json_out_dir for downstream stages.
AdmissionEntry admit_file(const std::string& path, const SynthesisHook& synth,
                          const std::string& json_out_dir);

struct PartitionConfig {
    double train_fraction = 0.20;
    double reference_fraction = 0.08;
    // remainder is the test split
    std::uint64_t seed = 1;
};

// Stratified 20/8/72 partition, rounded per label stratum, seeded shuffle.
// Every represented label contributes to the train split; strata with fewer
// than 3 entries are assigned best-effort (train first, then reference) and
// produce a warning.
Manifest partition(const std::vector<AdmissionEntry>& admitted, const PartitionConfig& cfg,
                   std::vector<std::string>* warnings = nullptr);

} // namespace dftforge
