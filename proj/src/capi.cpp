#include "dftforge.h"

#include <cstring>
#include <filesystem>
#include <memory>
#include <new>

#include "dftforge/autoencoder.hpp"
#include "dftforge/corpus.hpp"
#include "dftforge/eval.hpp"
#include "dftforge/lint.hpp"
#include "dftforge/netlist.hpp"
#include "dftforge/orchestrator.hpp"
#include "dftforge/retrieval.hpp"
#include "dftforge/sim.hpp"
#include "dftforge/tfidf.hpp"
#include "json.hpp"

using namespace dftforge;
using nlohmann::json;

// Opaque handle definitions: thin wrappers over the core types.
struct dft_netlist { Netlist nl; };
struct dft_tfidf { TfidfModel model; };
struct dft_autoencoder { AutoencoderModel model; };
struct dft_index { ReferenceIndex index; };

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

template <typename F>
dft_status guarded(dft_status fail_code, F&& fn) {
    try {
        fn();
        return DFT_OK;
    } catch (const Error& e) {
        set_error(e.what());
        return fail_code;
    } catch (const std::exception& e) {
        set_error(e.what());
        return DFT_ERR_INTERNAL;
    }
}

dft_status require(bool ok, const char* what) {
    if (ok) return DFT_OK;
    set_error(std::string("invalid argument: ") + what);
    return DFT_ERR_INVALID_ARG;
}

} // namespace

extern "C" {

const char* dft_version(void) { return "0.1.0"; }

const char* dft_last_error(void) { return g_last_error.c_str(); }

void dft_string_free(char* s) { std::free(s); }

size_t dft_feature_dim(void) { return kFeatureDim; }

/* --- netlist ------------------------------------------------------------ */

dft_status dft_netlist_parse(const char* json_text, dft_netlist** out) {
    if (auto rc = require(json_text && out, "dft_netlist_parse")) return rc;
    return guarded(DFT_ERR_PARSE, [&] {
        auto h = std::make_unique<dft_netlist>();
        h->nl = parse_netlist(json_text);
        *out = h.release();
    });
}

void dft_netlist_free(dft_netlist* nl) { delete nl; }

dft_status dft_netlist_to_json(const dft_netlist* nl, char** out_json) {
    if (auto rc = require(nl && out_json, "dft_netlist_to_json")) return rc;
    return guarded(DFT_ERR_INTERNAL, [&] { *out_json = dup_string(serialize_netlist(nl->nl)); });
}

dft_status dft_netlist_stats(const dft_netlist* nl, char** out_json) {
    if (auto rc = require(nl && out_json, "dft_netlist_stats")) return rc;
    return guarded(DFT_ERR_INTERNAL, [&] {
        json j = {{"top", nl->nl.top},
                  {"cells", nl->nl.cell_count()},
                  {"nets", nl->nl.net_universe().size()},
                  {"sequential_cells", nl->nl.sequential_cells().size()}};
        *out_json = dup_string(j.dump() + "\n");
    });
}

/* --- lint ---------------------------------------------------------------- */

dft_status dft_lint_run(const dft_netlist* nl, char** out_report_json) {
    if (auto rc = require(nl && out_report_json, "dft_lint_run")) return rc;
    return guarded(DFT_ERR_DOMAIN,
                   [&] { *out_report_json = dup_string(lint_report_json(lint(nl->nl))); });
}

dft_status dft_lint_text(const dft_netlist* nl, char** out_text) {
    if (auto rc = require(nl && out_text, "dft_lint_text")) return rc;
    return guarded(DFT_ERR_DOMAIN,
                   [&] { *out_text = dup_string(lint_report_text(nl->nl, lint(nl->nl))); });
}

/* --- tfidf ---------------------------------------------------------------- */

dft_status dft_tfidf_fit(const char* const* docs, size_t n_docs, dft_tfidf** out) {
    if (auto rc = require(docs && out && n_docs > 0, "dft_tfidf_fit")) return rc;
    return guarded(DFT_ERR_DOMAIN, [&] {
        std::vector<std::string> corpus;
        corpus.reserve(n_docs);
        for (size_t i = 0; i < n_docs; ++i) {
            if (!docs[i]) throw Error("dft_tfidf_fit: null document at index " + std::to_string(i));
            corpus.emplace_back(docs[i]);
        }
        auto h = std::make_unique<dft_tfidf>();
        h->model = TfidfModel::fit(corpus);
        *out = h.release();
    });
}

dft_status dft_tfidf_to_json(const dft_tfidf* m, char** out_json) {
    if (auto rc = require(m && out_json, "dft_tfidf_to_json")) return rc;
    return guarded(DFT_ERR_INTERNAL, [&] { *out_json = dup_string(m->model.to_json()); });
}

dft_status dft_tfidf_from_json(const char* json_text, dft_tfidf** out) {
    if (auto rc = require(json_text && out, "dft_tfidf_from_json")) return rc;
    return guarded(DFT_ERR_PARSE, [&] {
        auto h = std::make_unique<dft_tfidf>();
        h->model = TfidfModel::from_json(json_text);
        *out = h.release();
    });
}

void dft_tfidf_free(dft_tfidf* m) { delete m; }

size_t dft_tfidf_vocab_size(const dft_tfidf* m) { return m ? m->model.vocabulary().size() : 0; }

dft_status dft_tfidf_transform(const dft_tfidf* m, const char* doc, double* out_x,
                               int* out_all_oov) {
    if (auto rc = require(m && doc && out_x, "dft_tfidf_transform")) return rc;
    return guarded(DFT_ERR_DOMAIN, [&] {
        FeatureVector fv = m->model.transform(doc);
        std::memcpy(out_x, fv.x.data(), fv.x.size() * sizeof(double));
        if (out_all_oov) *out_all_oov = fv.all_oov ? 1 : 0;
    });
}

/* --- autoencoder ----------------------------------------------------------- */

dft_status dft_autoencoder_train(const double* X, const double* Y, size_t n_samples,
                                 const char* config_json, char** out_log_csv,
                                 dft_autoencoder** out) {
    if (auto rc = require(X && Y && out && n_samples > 0, "dft_autoencoder_train")) return rc;
    return guarded(DFT_ERR_DOMAIN, [&] {
        AutoencoderConfig cfg =
            config_json ? AutoencoderConfig::from_json(config_json) : AutoencoderConfig{};
        std::vector<TrainSample> corpus(n_samples);
        for (size_t i = 0; i < n_samples; ++i) {
            corpus[i].x.assign(X + i * cfg.input_dim, X + (i + 1) * cfg.input_dim);
            for (size_t j = 0; j < 4; ++j)
                corpus[i].y[j] = Y[i * 4 + j] != 0.0 ? 1 : 0;
        }
        TrainResult tr = train(corpus, cfg);
        if (out_log_csv) *out_log_csv = dup_string(training_log_csv(tr.log));
        auto h = std::make_unique<dft_autoencoder>();
        h->model = std::move(tr.model);
        *out = h.release();
    });
}

dft_status dft_autoencoder_to_json(const dft_autoencoder* m, char** out_json) {
    if (auto rc = require(m && out_json, "dft_autoencoder_to_json")) return rc;
    return guarded(DFT_ERR_INTERNAL, [&] { *out_json = dup_string(m->model.to_json()); });
}

dft_status dft_autoencoder_from_json(const char* json_text, dft_autoencoder** out) {
    if (auto rc = require(json_text && out, "dft_autoencoder_from_json")) return rc;
    return guarded(DFT_ERR_PARSE, [&] {
        auto h = std::make_unique<dft_autoencoder>();
        h->model = AutoencoderModel::from_json(json_text);
        *out = h.release();
    });
}

void dft_autoencoder_free(dft_autoencoder* m) { delete m; }

size_t dft_autoencoder_input_dim(const dft_autoencoder* m) {
    return m ? m->model.cfg.input_dim : 0;
}

size_t dft_autoencoder_embed_dim(const dft_autoencoder* m) {
    return m ? m->model.cfg.embed_dim : 0;
}

dft_status dft_autoencoder_encode(const dft_autoencoder* m, const double* x, size_t x_len,
                                  double* out_z, size_t z_len) {
    if (auto rc = require(m && x && out_z, "dft_autoencoder_encode")) return rc;
    if (auto rc = require(x_len == m->model.cfg.input_dim && z_len == m->model.cfg.embed_dim,
                          "dft_autoencoder_encode: dimension mismatch"))
        return rc;
    return guarded(DFT_ERR_DOMAIN, [&] {
        std::vector<double> z = m->model.encode(std::vector<double>(x, x + x_len));
        std::memcpy(out_z, z.data(), z.size() * sizeof(double));
    });
}

/* --- index ----------------------------------------------------------------- */

dft_status dft_index_build(const dft_autoencoder* model, const dft_tfidf* tfidf,
                           const char* refs_json, dft_index** out) {
    if (auto rc = require(model && tfidf && refs_json && out, "dft_index_build")) return rc;
    return guarded(DFT_ERR_DOMAIN, [&] {
        json refs = json::parse(refs_json, nullptr, false);
        if (refs.is_discarded() || !refs.is_array())
            throw Error("dft_index_build: refs_json must be a JSON array");
        std::vector<ReferenceInput> inputs;
        for (const auto& r : refs) {
            ReferenceInput in;
            in.id = r.at("id").get<std::string>();
            in.buggy_source = r.value("buggy_source", "");
            in.fixed_source = r.value("fixed_source", "");
            in.json_repr = r.at("json_repr").get<std::string>();
            in.fixed_json_repr = r.at("fixed_json_repr").get<std::string>();
            in.buggy_path = r.value("buggy_path", "");
            in.fixed_path = r.value("fixed_path", "");
            in.json_path = r.value("json_path", "");
            inputs.push_back(std::move(in));
        }
        auto h = std::make_unique<dft_index>();
        h->index = ReferenceIndex::build(model->model, tfidf->model, inputs);
        *out = h.release();
    });
}

dft_status dft_index_to_json(const dft_index* idx, char** out_json) {
    if (auto rc = require(idx && out_json, "dft_index_to_json")) return rc;
    return guarded(DFT_ERR_INTERNAL, [&] { *out_json = dup_string(idx->index.to_json()); });
}

dft_status dft_index_from_json(const char* json_text, dft_index** out) {
    if (auto rc = require(json_text && out, "dft_index_from_json")) return rc;
    return guarded(DFT_ERR_PARSE, [&] {
        auto h = std::make_unique<dft_index>();
        h->index = ReferenceIndex::from_json(json_text);
        *out = h.release();
    });
}

void dft_index_free(dft_index* idx) { delete idx; }

size_t dft_index_size(const dft_index* idx) { return idx ? idx->index.size() : 0; }

dft_status dft_index_set_model_paths(dft_index* idx, const char* tfidf_path,
                                     const char* encoder_path) {
    if (auto rc = require(idx != nullptr, "dft_index_set_model_paths")) return rc;
    idx->index.tfidf_path = tfidf_path ? tfidf_path : "";
    idx->index.encoder_path = encoder_path ? encoder_path : "";
    return DFT_OK;
}

dft_status dft_index_info(const dft_index* idx, char** out_json) {
    if (auto rc = require(idx && out_json, "dft_index_info")) return rc;
    return guarded(DFT_ERR_INTERNAL, [&] {
        json ids = json::array();
        for (const auto& e : idx->index.entries()) ids.push_back(e.id);
        json j = {{"size", idx->index.size()},
                  {"tfidf_path", idx->index.tfidf_path},
                  {"encoder_path", idx->index.encoder_path},
                  {"ids", ids}};
        *out_json = dup_string(j.dump() + "\n");
    });
}

dft_status dft_retrieve(const dft_index* idx, const double* z, size_t z_len,
                        char** out_result_json) {
    if (auto rc = require(idx && z && out_result_json, "dft_retrieve")) return rc;
    return guarded(DFT_ERR_DOMAIN, [&] {
        SimilarityResult res = idx->index.retrieve(std::vector<double>(z, z + z_len));
        const auto& best = idx->index.entries()[res.best_index];
        json j = {{"best_id", best.id},
                  {"best_index", res.best_index},
                  {"best_label", best.label.y},
                  {"s_max", res.s_max},
                  {"scores", res.scores}};
        *out_result_json = dup_string(j.dump() + "\n");
    });
}

/* --- equivalence --------------------------------------------------------------- */

dft_status dft_check_equivalence(const dft_netlist* a, const dft_netlist* b,
                                 const char* budget_json, char** out_verdict_json) {
    if (auto rc = require(a && b && out_verdict_json, "dft_check_equivalence")) return rc;
    return guarded(DFT_ERR_DOMAIN, [&] {
        EquivBudget budget = budget_json ? EquivBudget::from_json(budget_json) : EquivBudget{};
        EquivVerdict v = check_equivalence(a->nl, b->nl, budget);
        *out_verdict_json = dup_string(verdict_json(v));
    });
}

/* --- corpus ----------------------------------------------------------------------- */

dft_status dft_admit_file(const char* path, const char* synth_command,
                          const char* json_out_dir, char** out_entry_json) {
    if (auto rc = require(path && out_entry_json, "dft_admit_file")) return rc;
    return guarded(DFT_ERR_DOMAIN, [&] {
        SynthesisHook hook;
        hook.command = synth_command ? synth_command : "";
        hook.workdir = json_out_dir ? json_out_dir : ".";
        AdmissionEntry e = admit_file(path, hook, json_out_dir ? json_out_dir : ".");
        *out_entry_json = dup_string(e.to_json() + "\n");
    });
}

dft_status dft_partition_run(const char* admitted_jsonl, unsigned long long seed,
                             char** out_manifest_jsonl) {
    if (auto rc = require(admitted_jsonl && out_manifest_jsonl, "dft_partition_run")) return rc;
    return guarded(DFT_ERR_DOMAIN, [&] {
        std::vector<AdmissionEntry> admitted;
        for (const auto& line : split_lines(admitted_jsonl)) {
            if (trim(line).empty()) continue;
            admitted.push_back(AdmissionEntry::from_json(line));
        }
        PartitionConfig cfg;
        cfg.seed = seed;
        std::vector<std::string> warnings;
        Manifest m = partition(admitted, cfg, &warnings);
        *out_manifest_jsonl = dup_string(m.to_jsonl());
    });
}

dft_status dft_manifest_load(const char* path, int verify, char** out_jsonl) {
    if (auto rc = require(path && out_jsonl, "dft_manifest_load")) return rc;
    return guarded(DFT_ERR_DOMAIN, [&] {
        Manifest m = Manifest::from_jsonl(read_file(path));
        if (verify) m.verify_hashes();
        *out_jsonl = dup_string(m.to_jsonl());
    });
}

/* --- repair / eval ------------------------------------------------------------------- */

namespace {

struct LoadedPipeline {
    ReferenceIndex index;
    TfidfModel tfidf;
    AutoencoderModel model;
};

LoadedPipeline load_pipeline(const json& cfg) {
    LoadedPipeline p;
    const std::string index_path = cfg.at("index_path").get<std::string>();
    p.index = ReferenceIndex::from_json(read_file(index_path));
    std::string tfidf_path = cfg.value("tfidf_path", "");
    if (tfidf_path.empty()) tfidf_path = p.index.tfidf_path;
    if (tfidf_path.empty()) throw Error("no tfidf model path (flag or index metadata)");
    p.tfidf = TfidfModel::from_json(read_file(tfidf_path));
    std::string encoder_path = cfg.value("encoder_path", "");
    if (encoder_path.empty()) encoder_path = p.index.encoder_path;
    if (encoder_path.empty()) throw Error("no encoder model path (flag or index metadata)");
    p.model = AutoencoderModel::from_json(read_file(encoder_path));
    return p;
}

RepairConfig repair_config_from(const json& cfg) {
    RepairConfig rc;
    rc.max_iterations = cfg.value("max_iterations", 5);
    if (rc.max_iterations < 1) throw Error("max_iterations must be >= 1");
    rc.synth.command = cfg.value("synth_command", "");
    rc.synth.workdir = cfg.value("workdir", ".");
    rc.templates_dir = cfg.value("templates_dir", "templates");
    if (cfg.contains("budget")) rc.budget = EquivBudget::from_json(cfg["budget"].dump());
    rc.use_rag = cfg.value("use_rag", true);
    return rc;
}

std::unique_ptr<LlmTransport> transport_from(const json& cfg) {
    if (cfg.contains("mock_llm_dir"))
        return make_mock_client(cfg["mock_llm_dir"].get<std::string>());
    if (cfg.contains("llm")) return make_http_client(LlmClientSpec::from_json(cfg["llm"].dump()));
    throw Error("config needs either mock_llm_dir or llm");
}

} // namespace

dft_status dft_repair_run(const char* config_json, char** out_session_json) {
    if (auto rc = require(config_json && out_session_json, "dft_repair_run")) return rc;
    return guarded(DFT_ERR_DOMAIN, [&] {
        json cfg = json::parse(config_json, nullptr, false);
        if (cfg.is_discarded()) throw Error("dft_repair_run: malformed config JSON");

        std::string source;
        std::string design_id = cfg.value("design_id", "");
        if (cfg.contains("design_source")) {
            source = cfg["design_source"].get<std::string>();
        } else if (cfg.contains("design_path")) {
            source = read_file(cfg["design_path"].get<std::string>());
            if (design_id.empty())
                design_id = std::filesystem::path(cfg["design_path"].get<std::string>())
                                .stem()
                                .string();
        } else {
            throw Error("dft_repair_run: need design_source or design_path");
        }
        if (design_id.empty()) design_id = "design";

        LoadedPipeline p = load_pipeline(cfg);
        RepairConfig rc = repair_config_from(cfg);
        auto transport = transport_from(cfg);

        RepairSession session = repair(design_id, source, p.index, p.model, p.tfidf,
                                       *transport, rc);
        const std::string out = session.to_json();
        if (cfg.contains("session_out"))
            write_file(cfg["session_out"].get<std::string>(), out);
        *out_session_json = dup_string(out);
    });
}

dft_status dft_eval_run(const char* config_json, char** out_summary_json) {
    if (auto rc = require(config_json && out_summary_json, "dft_eval_run")) return rc;
    return guarded(DFT_ERR_DOMAIN, [&] {
        json cfg = json::parse(config_json, nullptr, false);
        if (cfg.is_discarded()) throw Error("dft_eval_run: malformed config JSON");

        Manifest manifest = Manifest::from_jsonl(read_file(cfg.at("manifest_path").get<std::string>()));
        if (cfg.value("verify_hashes", true)) manifest.verify_hashes();

        LoadedPipeline p = load_pipeline(cfg);
        EvalOptions opt;
        opt.repair = repair_config_from(cfg);
        opt.split = cfg.value("split", "test");
        opt.jobs = cfg.value("jobs", std::size_t{1});
        opt.out_dir = cfg.value("out_dir", "");
        if (cfg.contains("mock_llm_dir")) opt.mock_llm_dir = cfg["mock_llm_dir"].get<std::string>();
        else if (cfg.contains("llm")) opt.llm = LlmClientSpec::from_json(cfg["llm"].dump());

        EvalSummary s = run_eval(manifest, p.index, p.model, p.tfidf, opt);
        json rows = json::array();
        for (const auto& r : s.rows)
            rows.push_back({{"design_id", r.design_id},
                            {"status", repair_status_name(r.status)},
                            {"iterations", r.iterations},
                            {"s_max", r.s_max}});
        json j = {{"total", s.total},
                  {"repaired", s.repaired},
                  {"repair_rate", s.repair_rate},
                  {"rows", rows},
                  {"csv", eval_summary_csv(s)}};
        *out_summary_json = dup_string(j.dump(2) + "\n");
    });
}

} // extern "C"
