#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dftforge/lint.hpp"
#include "dftforge/llm.hpp"
#include "dftforge/retrieval.hpp"
#include "dftforge/sim.hpp"

namespace dftforge {

// Prompt sections live in versioned template files, not in code.
struct PromptTemplates {
    std::string task;              // task.txt
    std::string background;        // background.txt
    std::string error_definitions; // error_definitions.txt

    static PromptTemplates load(const std::string& dir);
};

struct PromptInputs {
    std::string reference_buggy;
    std::string reference_fixed;
    std::string target_source;
    std::string feedback; // empty on iteration 1
    bool include_reference = true; // false under the no-RAG ablation
};

// Deterministic rendering; fixed section order: task, background, error
// definitions, reference-answer pair, target code, then (iterations > 1)
// the verifier feedback verbatim.
std::string render_prompt(const PromptTemplates& tpl, const PromptInputs& in, int iteration);

// First fenced code block of an LLM response, language tag ignored.
std::optional<std::string> extract_code_block(const std::string& response);

// External synthesis hook. `command` is a shell template with {in} and {out}
// placeholders producing a netlist JSON file. Sources that already look like
// JSON (first non-space byte '{') bypass the tool entirely.
struct SynthesisHook {
    std::string command;
    std::string workdir = ".";
};

struct SynthResult {
    bool ok = false;
    bool tool_missing = false;
    std::string json_text;
    std::string failure_report; // tool diagnostics on failure
};

SynthResult synthesize_to_json(const std::string& source, const SynthesisHook& hook);

// Default invocation of the open-source synthesis tool: read, auto-top,
// proc, flatten, JSON write.
std::string default_synth_command();

enum class RepairStatus { Repaired, FailedMaxIter, FailedEquiv, FailedSynthTool, AbortedTransport };
const char* repair_status_name(RepairStatus s);

struct IterationRecord {
    int iteration = 0;
    std::string prompt_digest; // content hash of the rendered prompt
    std::string llm_response;
    std::string extracted_code;
    bool synth_ok = false;
    bool lint_reached = false;
    bool lint_clean = false;
    LabelVector lint_label;
    std::string equiv_verdict; // empty when equivalence was not reached
    std::string feedback;      // verifier output fed to the next iteration
};

struct RepairSession {
    std::string design_id;
    std::string reference_id;
    double s_max = 0.0;
    bool used_rag = true;
    std::vector<IterationRecord> iterations;
    RepairStatus status = RepairStatus::FailedMaxIter;
    std::string final_code; // accepted fix, REPAIRED only
    std::string note;       // degraded-path diagnostics

    std::string to_json() const;
    static RepairSession from_json(const std::string& text);
};

struct RepairConfig {
    int max_iterations = 5; // K
    SynthesisHook synth;
    std::string templates_dir = "templates";
    EquivBudget budget;
    bool use_rag = true;
};

// The iterative repair loop: retrieve the closest reference, prompt the LLM,
// verify each candidate (synthesis, netlist validation, lint), and run the
// bounded equivalence check against the original once a candidate lints
// clean. Equivalence failures are fed back like any other verifier failure.
RepairSession repair(const std::string& design_id, const std::string& target_source,
                     const ReferenceIndex& index, const AutoencoderModel& model,
                     const TfidfModel& tfidf, LlmTransport& llm, const RepairConfig& cfg);

struct EvalRow {
    std::string design_id;
    RepairStatus status = RepairStatus::FailedMaxIter;
    int iterations = 0;
    double s_max = 0.0;
};

struct EvalSummary {
    std::vector<EvalRow> rows;
    std::size_t total = 0;
    std::size_t repaired = 0;
    double repair_rate = 0.0;
};

std::string eval_summary_csv(const EvalSummary& s);
EvalSummary summarize(std::vector<EvalRow> rows);

} // namespace dftforge
