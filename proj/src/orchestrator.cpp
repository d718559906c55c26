#include "dftforge/orchestrator.hpp"

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "json.hpp"

using nlohmann::json;

namespace dftforge {

PromptTemplates PromptTemplates::load(const std::string& dir) {
    PromptTemplates t;
    t.task = read_file(dir + "/task.txt");
    t.background = read_file(dir + "/background.txt");
    t.error_definitions = read_file(dir + "/error_definitions.txt");
    return t;
}

std::string render_prompt(const PromptTemplates& tpl, const PromptInputs& in, int iteration) {
    std::ostringstream ss;
    ss << "## Task\n" << trim(tpl.task) << "\n\n";
    ss << "## Testability background\n" << trim(tpl.background) << "\n\n";
    ss << "## DFT violation types\n" << trim(tpl.error_definitions) << "\n\n";
    if (in.include_reference) {
        ss << "## Reference design with a similar violation\n```\n"
           << trim(in.reference_buggy) << "\n```\n\n";
        ss << "## Validated repair of the reference design\n```\n"
           << trim(in.reference_fixed) << "\n```\n\n";
    }
    ss << "## Design to repair\n```\n" << trim(in.target_source) << "\n```\n";
    if (iteration > 1) {
        ss << "\n## Verifier feedback on your previous attempt\n"
           << trim(in.feedback) << "\n";
    }
    ss << "\nReturn the complete repaired design in a single fenced code block.\n";
    return ss.str();
}

std::optional<std::string> extract_code_block(const std::string& response) {
    const std::string fence = "```";
    auto open = response.find(fence);
    if (open == std::string::npos) return std::nullopt;
    auto lang_end = response.find('\n', open + fence.size());
    if (lang_end == std::string::npos) return std::nullopt;
    auto close = response.find(fence, lang_end + 1);
    if (close == std::string::npos) return std::nullopt;
    std::string body = response.substr(lang_end + 1, close - lang_end - 1);
    if (!body.empty() && body.back() == '\n') body.pop_back();
    return body;
}

std::string default_synth_command() {
    return "yosys -q -p 'read_verilog {in}; hierarchy -auto-top; proc; flatten; write_json {out}'";
}

namespace {

bool looks_like_json(const std::string& source) {
    for (char c : source) {
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        return c == '{';
    }
    return false;
}

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
    std::size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
        s.replace(pos, from.size(), to);
        pos += to.size();
    }
    return s;
}

} // namespace

SynthResult synthesize_to_json(const std::string& source, const SynthesisHook& hook) {
    SynthResult r;
    if (looks_like_json(source)) {
        r.ok = true;
        r.json_text = source;
        return r;
    }
    if (hook.command.empty()) {
        r.tool_missing = true;
        r.failure_report = "no synthesis command configured and input is not netlist JSON";
        return r;
    }

    namespace fs = std::filesystem;
    fs::path work(hook.workdir.empty() ? "." : hook.workdir);
    std::error_code ec;
    fs::create_directories(work, ec);
    const std::string tag = content_hash(source);
    fs::path in_path = work / ("synth_in_" + tag + ".v");
    fs::path out_path = work / ("synth_out_" + tag + ".json");
    fs::path log_path = work / ("synth_log_" + tag + ".txt");
    write_file(in_path.string(), source);

    std::string cmd = replace_all(hook.command, "{in}", in_path.string());
    cmd = replace_all(cmd, "{out}", out_path.string());
    cmd += " >" + log_path.string() + " 2>&1";

    const int rc = std::system(cmd.c_str());
    std::string log = file_exists(log_path.string()) ? read_file(log_path.string()) : "";
    if (rc != 0) {
        // 127 is the shell's command-not-found
        r.tool_missing = (rc == 127 * 256 || rc == 127);
        r.failure_report = r.tool_missing
                               ? "synthesis tool not found: " + hook.command
                               : "synthesis failed (exit " + std::to_string(rc) + "):\n" + log;
        return r;
    }
    if (!file_exists(out_path.string())) {
        r.failure_report = "synthesis produced no output file:\n" + log;
        return r;
    }
    r.ok = true;
    r.json_text = read_file(out_path.string());
    return r;
}

const char* repair_status_name(RepairStatus s) {
    switch (s) {
        case RepairStatus::Repaired: return "REPAIRED";
        case RepairStatus::FailedMaxIter: return "FAILED_MAX_ITER";
        case RepairStatus::FailedEquiv: return "FAILED_EQUIV";
        case RepairStatus::FailedSynthTool: return "FAILED_SYNTH_TOOL";
        case RepairStatus::AbortedTransport: return "ABORTED_TRANSPORT";
    }
    return "?";
}

namespace {

std::optional<RepairStatus> repair_status_from(const std::string& s) {
    for (RepairStatus st : {RepairStatus::Repaired, RepairStatus::FailedMaxIter,
                            RepairStatus::FailedEquiv, RepairStatus::FailedSynthTool,
                            RepairStatus::AbortedTransport})
        if (s == repair_status_name(st)) return st;
    return std::nullopt;
}

} // namespace

std::string RepairSession::to_json() const {
    json jits = json::array();
    for (const auto& it : iterations) {
        jits.push_back({{"iteration", it.iteration},
                        {"prompt_digest", it.prompt_digest},
                        {"llm_response", it.llm_response},
                        {"extracted_code", it.extracted_code},
                        {"synth_ok", it.synth_ok},
                        {"lint_reached", it.lint_reached},
                        {"lint_clean", it.lint_clean},
                        {"lint_label", it.lint_label.y},
                        {"equiv_verdict", it.equiv_verdict},
                        {"feedback", it.feedback}});
    }
    json root = {{"version", 1},
                 {"kind", "repair-session"},
                 {"design_id", design_id},
                 {"reference_id", reference_id},
                 {"s_max", s_max},
                 {"used_rag", used_rag},
                 {"status", repair_status_name(status)},
                 {"final_code", final_code},
                 {"note", note},
                 {"iterations", jits}};
    return root.dump(2) + "\n";
}

RepairSession RepairSession::from_json(const std::string& text) {
    json root = json::parse(text, nullptr, false);
    if (root.is_discarded()) throw Error("repair session: malformed JSON");
    RepairSession s;
    s.design_id = root.value("design_id", "");
    s.reference_id = root.value("reference_id", "");
    s.s_max = root.value("s_max", 0.0);
    s.used_rag = root.value("used_rag", true);
    auto st = repair_status_from(root.value("status", ""));
    if (!st) throw Error("repair session: bad status");
    s.status = *st;
    s.final_code = root.value("final_code", "");
    s.note = root.value("note", "");
    if (!root.contains("iterations") || !root["iterations"].is_array())
        throw Error("repair session: missing iterations array");
    for (const auto& ji : root["iterations"]) {
        IterationRecord it;
        it.iteration = ji.value("iteration", 0);
        it.prompt_digest = ji.value("prompt_digest", "");
        it.llm_response = ji.value("llm_response", "");
        it.extracted_code = ji.value("extracted_code", "");
        it.synth_ok = ji.value("synth_ok", false);
        it.lint_reached = ji.value("lint_reached", false);
        it.lint_clean = ji.value("lint_clean", false);
        it.lint_label.y = ji.value("lint_label", std::array<int, 4>{0, 0, 0, 0});
        it.equiv_verdict = ji.value("equiv_verdict", "");
        it.feedback = ji.value("feedback", "");
        s.iterations.push_back(std::move(it));
    }
    return s;
}

RepairSession repair(const std::string& design_id, const std::string& target_source,
                     const ReferenceIndex& index, const AutoencoderModel& model,
                     const TfidfModel& tfidf, LlmTransport& llm, const RepairConfig& cfg) {
    RepairSession session;
    session.design_id = design_id;
    session.used_rag = cfg.use_rag;

    PromptTemplates tpl = PromptTemplates::load(cfg.templates_dir);

    // Original design: needed for retrieval and as the equivalence baseline.
    SynthResult orig = synthesize_to_json(target_source, cfg.synth);
    if (orig.tool_missing) {
        session.status = RepairStatus::FailedSynthTool;
        session.note = orig.failure_report;
        return session;
    }
    std::optional<Netlist> original_nl;
    std::string pending_feedback;
    if (orig.ok) {
        try {
            original_nl = parse_netlist(orig.json_text);
        } catch (const Error& e) {
            pending_feedback = std::string("original design failed netlist validation: ") + e.what();
            session.note = pending_feedback;
        }
    } else {
        pending_feedback = "original design failed synthesis:\n" + orig.failure_report;
        session.note = "original design did not synthesize";
    }

    const ReferenceEntry* ref = nullptr;
    if (original_nl) {
        FeatureVector fv = tfidf.transform(orig.json_text);
        if (!fv.all_oov) {
            std::vector<double> z = model.encode(fv.x);
            double n = 0.0;
            for (double v : z) n += v * v;
            if (n > 0.0) {
                SimilarityResult sim = index.retrieve(z);
                ref = &index.entries()[sim.best_index];
                session.reference_id = ref->id;
                session.s_max = sim.s_max;
            }
        }
        if (!ref) session.note = "query embedding unavailable (all-OOV features); no reference retrieved";
    }

    PromptInputs pin;
    pin.include_reference = cfg.use_rag;
    pin.reference_buggy = ref ? ref->buggy_source : "(no reference available)";
    pin.reference_fixed = ref ? ref->fixed_source : "(no reference available)";
    pin.target_source = target_source;

    for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
        IterationRecord rec;
        rec.iteration = iter;
        pin.feedback = pending_feedback;
        const std::string prompt = render_prompt(tpl, pin, iter);
        rec.prompt_digest = content_hash(prompt);

        std::string response;
        try {
            response = llm.complete({{"user", prompt}});
        } catch (const Error& e) {
            session.status = RepairStatus::AbortedTransport;
            session.note = e.what();
            session.iterations.push_back(std::move(rec));
            return session;
        }
        rec.llm_response = response;

        auto code = extract_code_block(response);
        if (!code) {
            rec.feedback = "no code block found in the response; return the full design "
                           "in a single fenced code block";
            pending_feedback = rec.feedback;
            session.iterations.push_back(std::move(rec));
            continue;
        }
        rec.extracted_code = *code;

        SynthResult sr = synthesize_to_json(*code, cfg.synth);
        if (sr.tool_missing) {
            session.status = RepairStatus::FailedSynthTool;
            session.note = sr.failure_report;
            session.iterations.push_back(std::move(rec));
            return session;
        }
        if (!sr.ok) {
            rec.feedback = "synthesis failed:\n" + sr.failure_report;
            pending_feedback = rec.feedback;
            session.iterations.push_back(std::move(rec));
            continue;
        }
        rec.synth_ok = true;

        Netlist candidate;
        try {
            candidate = parse_netlist(sr.json_text);
        } catch (const Error& e) {
            rec.feedback = std::string("netlist validation failed: ") + e.what();
            pending_feedback = rec.feedback;
            session.iterations.push_back(std::move(rec));
            continue;
        }

        LintResult lr = lint(candidate);
        rec.lint_reached = true;
        rec.lint_label = lr.label;
        rec.lint_clean = lr.label.clean();
        if (!rec.lint_clean) {
            rec.feedback = lint_report_text(candidate, lr);
            pending_feedback = rec.feedback;
            session.iterations.push_back(std::move(rec));
            continue;
        }

        if (!original_nl) {
            // Nothing to compare against: the fix lints clean but equivalence
            // can never be validated.
            rec.equiv_verdict = "INCOMPARABLE";
            rec.feedback = "original design unavailable; equivalence cannot be validated";
            session.iterations.push_back(std::move(rec));
            session.status = RepairStatus::FailedEquiv;
            session.note = "lint-clean candidate produced but the original design never "
                           "synthesized; equivalence unverifiable";
            return session;
        }

        EquivVerdict verdict = check_equivalence(*original_nl, candidate, cfg.budget);
        switch (verdict.kind) {
            case EquivVerdict::Kind::EquivalentBounded:
                rec.equiv_verdict = "EQUIVALENT_BOUNDED";
                session.iterations.push_back(std::move(rec));
                session.status = RepairStatus::Repaired;
                session.final_code = *code;
                return session;
            case EquivVerdict::Kind::Counterexample:
                rec.equiv_verdict = "COUNTEREXAMPLE";
                rec.feedback = "the repaired design is not functionally equivalent to the "
                               "original:\n" + verdict_text(verdict);
                break;
            case EquivVerdict::Kind::Incomparable:
                rec.equiv_verdict = "INCOMPARABLE";
                rec.feedback = "equivalence could not be established:\n" + verdict_text(verdict);
                break;
        }
        pending_feedback = rec.feedback;
        session.iterations.push_back(std::move(rec));
    }

    session.status = RepairStatus::FailedMaxIter;
    return session;
}

std::string eval_summary_csv(const EvalSummary& s) {
    std::ostringstream ss;
    ss << "design_id,status,iterations,s_max\n";
    char buf[64];
    for (const auto& r : s.rows) {
        std::snprintf(buf, sizeof(buf), "%.6f", r.s_max);
        ss << r.design_id << "," << repair_status_name(r.status) << "," << r.iterations
           << "," << buf << "\n";
    }
    return ss.str();
}

EvalSummary summarize(std::vector<EvalRow> rows) {
    EvalSummary s;
    s.rows = std::move(rows);
    s.total = s.rows.size();
    for (const auto& r : s.rows)
        if (r.status == RepairStatus::Repaired) ++s.repaired;
    s.repair_rate = s.total == 0 ? 0.0 : static_cast<double>(s.repaired) / s.total;
    return s;
}

} // namespace dftforge
