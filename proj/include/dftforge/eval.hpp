#pragma once

#include <optional>

#include "dftforge/corpus.hpp"

namespace dftforge {

struct EvalOptions {
    RepairConfig repair;
    std::string mock_llm_dir;         // scripted transports when non-empty
    std::optional<LlmClientSpec> llm; // HTTP transport otherwise
    std::size_t jobs = 1;
    std::string out_dir;              // sessions + summary.csv; "" disables persistence
    std::string split = "test";
};

// Runs the repair loop over every manifest entry of the selected split.
// Sessions are isolated per design (own work directory, own transport:
// mock_llm_dir/<design_id>/ when it exists, else mock_llm_dir). Rows come
// back in manifest order regardless of the worker count.
EvalSummary run_eval(const Manifest& manifest, const ReferenceIndex& index,
                     const AutoencoderModel& model, const TfidfModel& tfidf,
                     const EvalOptions& opt);

} // namespace dftforge
