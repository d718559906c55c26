// dft-forge: single entry point for the DFT lint / embedding / retrieval /
// repair pipeline. Every stage is a subcommand; all functionality is reached
// through the dftforge C API (dftforge.h).
//
// Exit codes: 0 success, 1 domain failure (violations under --strict,
// non-equivalent designs, failed repairs), 2 usage errors.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dftforge.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Owned string coming back from the C API.
struct CStr {
    char* p = nullptr;
    ~CStr() { dft_string_free(p); }
    std::string str() const { return p ? std::string(p) : std::string(); }
};

[[noreturn]] void die(const std::string& msg, int code = 1) {
    std::cerr << "dft-forge: " << msg << "\n";
    std::exit(code);
}

void check(dft_status rc, const std::string& what) {
    if (rc != DFT_OK) die(what + ": " + dft_last_error());
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) die("cannot open " + path, 2);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spill(const std::string& path, const std::string& content) {
    fs::path p(path);
    if (p.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(p.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) die("cannot write " + path);
    out << content;
}

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v ? std::string(v) : fallback;
}

// Merged configuration: defaults <- config file <- environment <- flags.
// The resolved view is echoed next to outputs for provenance.
struct CliConfig {
    json data = json::object();

    static CliConfig load(const std::string& explicit_path) {
        CliConfig c;
        std::string path = explicit_path.empty() ? env_or("DFT_FORGE_CONFIG", "") : explicit_path;
        if (!path.empty()) {
            json j = json::parse(slurp(path), nullptr, false);
            if (j.is_discarded()) die("config file " + path + " is not valid JSON", 2);
            c.data = j;
        }
        auto env_over = [&](const char* env, const char* key) {
            const char* v = std::getenv(env);
            if (v) c.data[key] = std::string(v);
        };
        env_over("DFT_FORGE_SYNTH_CMD", "synth_command");
        env_over("DFT_FORGE_TEMPLATES", "templates_dir");
        env_over("DFT_FORGE_ENDPOINT", "endpoint");
        env_over("DFT_FORGE_MODEL", "model");
        env_over("DFT_FORGE_TOKEN_ENV", "token_env");
        return c;
    }

    std::string get(const char* key, const std::string& fallback) const {
        return data.value(key, fallback);
    }
    int get_int(const char* key, int fallback) const { return data.value(key, fallback); }
    json get_obj(const char* key) const {
        return data.contains(key) && data[key].is_object() ? data[key] : json::object();
    }
};

json budget_json(std::size_t stimuli, std::size_t cycles, std::size_t max_exh,
                 unsigned long long seed) {
    return {{"random_stimuli", stimuli},
            {"cycles", cycles},
            {"max_exhaustive_inputs", max_exh},
            {"seed", seed}};
}

struct ManifestRow {
    std::string id, source_path, json_path, split;
    std::array<int, 4> label{};
};

std::vector<ManifestRow> load_manifest_rows(const std::string& path, bool verify) {
    CStr jsonl;
    check(dft_manifest_load(path.c_str(), verify ? 1 : 0, &jsonl.p), "manifest load");
    std::vector<ManifestRow> rows;
    std::istringstream ss(jsonl.str());
    std::string line;
    while (std::getline(ss, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        ManifestRow r;
        r.id = j.at("id").get<std::string>();
        r.source_path = j.value("source_path", "");
        r.json_path = j.at("json_path").get<std::string>();
        r.split = j.at("split").get<std::string>();
        r.label = j.at("label").get<std::array<int, 4>>();
        rows.push_back(std::move(r));
    }
    return rows;
}

struct ModelPair {
    dft_tfidf* tfidf = nullptr;
    dft_autoencoder* encoder = nullptr;
    ~ModelPair() {
        dft_tfidf_free(tfidf);
        dft_autoencoder_free(encoder);
    }
};

// Resolve tfidf/encoder from flags, falling back to index metadata.
ModelPair load_models(const std::string& tfidf_path, const std::string& encoder_path,
                      dft_index* idx) {
    std::string tp = tfidf_path, ep = encoder_path;
    if ((tp.empty() || ep.empty()) && idx) {
        CStr info;
        check(dft_index_info(idx, &info.p), "index info");
        json j = json::parse(info.str());
        if (tp.empty()) tp = j.value("tfidf_path", "");
        if (ep.empty()) ep = j.value("encoder_path", "");
    }
    if (tp.empty()) die("no tfidf model (--tfidf flag or index metadata)", 2);
    if (ep.empty()) die("no encoder model (--encoder flag or index metadata)", 2);
    ModelPair m;
    check(dft_tfidf_from_json(slurp(tp).c_str(), &m.tfidf), "tfidf load");
    check(dft_autoencoder_from_json(slurp(ep).c_str(), &m.encoder), "encoder load");
    return m;
}

std::vector<double> embed_design(const ModelPair& m, const std::string& json_text,
                                 bool* all_oov = nullptr) {
    std::vector<double> x(dft_feature_dim());
    int oov = 0;
    check(dft_tfidf_transform(m.tfidf, json_text.c_str(), x.data(), &oov), "transform");
    if (all_oov) *all_oov = oov != 0;
    if (oov) return {};
    std::vector<double> z(dft_autoencoder_embed_dim(m.encoder));
    check(dft_autoencoder_encode(m.encoder, x.data(), x.size(), z.data(), z.size()), "encode");
    return z;
}

std::string fixed_sibling(const std::string& path) {
    fs::path p(path);
    return (p.parent_path() / (p.stem().string() + ".fixed" + p.extension().string())).string();
}

// --- subcommand implementations ----------------------------------------------

int cmd_lint(const std::string& design, bool as_json, bool strict) {
    dft_netlist* nl = nullptr;
    check(dft_netlist_parse(slurp(design).c_str(), &nl), "parse");
    CStr report;
    check(dft_lint_run(nl, &report.p), "lint");
    if (as_json) {
        std::cout << report.str();
    } else {
        CStr text;
        check(dft_lint_text(nl, &text.p), "lint");
        std::cout << text.str();
    }
    json j = json::parse(report.str());
    const bool dirty = !j["violations"].empty();
    dft_netlist_free(nl);
    return strict && dirty ? 1 : 0;
}

int cmd_vectorize_fit(std::vector<std::string> docs, const std::string& docs_dir,
                      const std::string& out) {
    if (!docs_dir.empty())
        for (const auto& e : fs::directory_iterator(docs_dir))
            if (e.path().extension() == ".json") docs.push_back(e.path().string());
    if (docs.empty()) die("no documents given", 2);
    std::sort(docs.begin(), docs.end());
    std::vector<std::string> texts;
    texts.reserve(docs.size());
    for (const auto& d : docs) texts.push_back(slurp(d));
    std::vector<const char*> ptrs;
    for (const auto& t : texts) ptrs.push_back(t.c_str());
    dft_tfidf* model = nullptr;
    check(dft_tfidf_fit(ptrs.data(), ptrs.size(), &model), "fit");
    CStr mj;
    check(dft_tfidf_to_json(model, &mj.p), "serialize model");
    spill(out, mj.str());
    std::cout << "fitted tf-idf on " << docs.size() << " documents ("
              << dft_tfidf_vocab_size(model) << " terms) -> " << out << "\n";
    dft_tfidf_free(model);
    return 0;
}

int cmd_vectorize(const std::string& model_path, const std::string& design, bool as_json) {
    dft_tfidf* model = nullptr;
    check(dft_tfidf_from_json(slurp(model_path).c_str(), &model), "model load");
    std::vector<double> x(dft_feature_dim());
    int oov = 0;
    check(dft_tfidf_transform(model, slurp(design).c_str(), x.data(), &oov), "transform");
    if (as_json) {
        std::cout << json{{"all_oov", oov != 0}, {"x", x}}.dump() << "\n";
    } else {
        std::size_t nonzero = 0;
        double norm = 0;
        for (double v : x) {
            if (v != 0.0) ++nonzero;
            norm += v * v;
        }
        std::cout << "vector: " << nonzero << " nonzero of " << x.size()
                  << ", l2=" << std::sqrt(norm) << (oov ? " (all terms out of vocabulary)" : "")
                  << "\n";
    }
    dft_tfidf_free(model);
    return 0;
}

int cmd_train(const std::string& manifest, const std::string& tfidf_path,
              const std::string& out_dir, const json& train_cfg, bool verify) {
    auto rows = load_manifest_rows(manifest, verify);
    dft_tfidf* tfidf = nullptr;
    check(dft_tfidf_from_json(slurp(tfidf_path).c_str(), &tfidf), "tfidf load");

    std::vector<double> X, Y;
    std::size_t n = 0;
    for (const auto& r : rows) {
        if (r.split != "train") continue;
        std::vector<double> x(dft_feature_dim());
        int oov = 0;
        check(dft_tfidf_transform(tfidf, slurp(r.json_path).c_str(), x.data(), &oov), "transform");
        X.insert(X.end(), x.begin(), x.end());
        for (int b : r.label) Y.push_back(b);
        ++n;
    }
    dft_tfidf_free(tfidf);
    if (n == 0) die("manifest has no train entries");

    dft_autoencoder* model = nullptr;
    CStr log;
    check(dft_autoencoder_train(X.data(), Y.data(), n, train_cfg.dump().c_str(), &log.p, &model),
          "train");
    CStr mj;
    check(dft_autoencoder_to_json(model, &mj.p), "serialize model");
    spill(out_dir + "/autoencoder.json", mj.str());
    spill(out_dir + "/training_log.csv", log.str());
    spill(out_dir + "/train_config.json", train_cfg.dump(2) + "\n");
    std::cout << "trained on " << n << " samples -> " << out_dir << "/autoencoder.json\n";
    dft_autoencoder_free(model);
    return 0;
}

int cmd_index(const std::string& manifest, const std::string& tfidf_path,
              const std::string& encoder_path, const std::string& out, bool verify) {
    auto rows = load_manifest_rows(manifest, verify);
    json refs = json::array();
    for (const auto& r : rows) {
        if (r.split != "reference") continue;
        const std::string fixed_json_path = fixed_sibling(r.json_path);
        if (!fs::exists(fixed_json_path))
            die("reference " + r.id + ": missing validated fix " + fixed_json_path);
        std::string buggy_source =
            (!r.source_path.empty() && fs::exists(r.source_path)) ? slurp(r.source_path)
                                                                  : slurp(r.json_path);
        std::string fixed_source_path = r.source_path.empty() ? "" : fixed_sibling(r.source_path);
        std::string fixed_source = (!fixed_source_path.empty() && fs::exists(fixed_source_path))
                                       ? slurp(fixed_source_path)
                                       : slurp(fixed_json_path);
        refs.push_back({{"id", r.id},
                        {"buggy_source", buggy_source},
                        {"fixed_source", fixed_source},
                        {"json_repr", slurp(r.json_path)},
                        {"fixed_json_repr", slurp(fixed_json_path)},
                        {"buggy_path", r.source_path},
                        {"fixed_path", fixed_source_path},
                        {"json_path", r.json_path}});
    }
    if (refs.empty()) die("manifest has no reference entries");

    ModelPair m;
    check(dft_tfidf_from_json(slurp(tfidf_path).c_str(), &m.tfidf), "tfidf load");
    check(dft_autoencoder_from_json(slurp(encoder_path).c_str(), &m.encoder), "encoder load");
    dft_index* idx = nullptr;
    check(dft_index_build(m.encoder, m.tfidf, refs.dump().c_str(), &idx), "index build");
    check(dft_index_set_model_paths(idx, tfidf_path.c_str(), encoder_path.c_str()), "index meta");
    CStr ij;
    check(dft_index_to_json(idx, &ij.p), "index serialize");
    spill(out, ij.str());
    std::cout << "indexed " << dft_index_size(idx) << " reference entries -> " << out << "\n";
    dft_index_free(idx);
    return 0;
}

int cmd_retrieve(const std::string& index_path, const std::string& design,
                 const std::string& tfidf_path, const std::string& encoder_path, bool as_json) {
    dft_index* idx = nullptr;
    check(dft_index_from_json(slurp(index_path).c_str(), &idx), "index load");
    ModelPair m = load_models(tfidf_path, encoder_path, idx);
    bool oov = false;
    std::vector<double> z = embed_design(m, slurp(design), &oov);
    if (oov) die("design has no in-vocabulary terms; cannot embed a zero vector");
    CStr res;
    check(dft_retrieve(idx, z.data(), z.size(), &res.p), "retrieve");
    if (as_json) {
        std::cout << res.str();
    } else {
        json j = json::parse(res.str());
        std::cout << "best: " << j["best_id"].get<std::string>() << "  s_max=" << std::fixed
                  << std::setprecision(6) << j["s_max"].get<double>() << "\n";
    }
    dft_index_free(idx);
    return 0;
}

int cmd_equiv(const std::string& a_path, const std::string& b_path, const json& budget,
              bool as_json) {
    dft_netlist* a = nullptr;
    dft_netlist* b = nullptr;
    check(dft_netlist_parse(slurp(a_path).c_str(), &a), "parse a");
    check(dft_netlist_parse(slurp(b_path).c_str(), &b), "parse b");
    CStr verdict;
    check(dft_check_equivalence(a, b, budget.dump().c_str(), &verdict.p), "equivalence");
    json j = json::parse(verdict.str());
    if (as_json) {
        std::cout << verdict.str();
    } else {
        std::cout << j["verdict"].get<std::string>() << " (" << j["stimuli_run"].get<std::size_t>()
                  << " stimuli, " << j["skipped"].get<std::size_t>() << " skipped)";
        if (j.contains("reason")) std::cout << " reason: " << j["reason"].get<std::string>();
        std::cout << "\n";
    }
    dft_netlist_free(a);
    dft_netlist_free(b);
    return j["verdict"] == "EQUIVALENT_BOUNDED" ? 0 : 1;
}

int cmd_repair(const json& cfg, const std::string& session_out, bool as_json) {
    CStr session;
    check(dft_repair_run(cfg.dump().c_str(), &session.p), "repair");
    json s = json::parse(session.str());
    if (!session_out.empty()) {
        json echo = cfg;
        echo.erase("design_source");
        spill(session_out + ".config.json", echo.dump(2) + "\n");
    }
    if (as_json) {
        std::cout << session.str();
    } else {
        std::cout << "status: " << s["status"].get<std::string>() << " after "
                  << s["iterations"].size() << " iteration(s)";
        if (!s["reference_id"].get<std::string>().empty())
            std::cout << " (reference " << s["reference_id"].get<std::string>()
                      << ", s_max=" << s["s_max"].get<double>() << ")";
        std::cout << "\n";
    }
    return s["status"] == "REPAIRED" ? 0 : 1;
}

int cmd_admit(const std::vector<std::string>& files, const std::string& synth_cmd,
              const std::string& out_dir, const std::string& out, bool as_json) {
    std::string jsonl;
    std::size_t admitted = 0;
    for (const auto& f : files) {
        CStr entry;
        check(dft_admit_file(f.c_str(), synth_cmd.empty() ? nullptr : synth_cmd.c_str(),
                             out_dir.c_str(), &entry.p),
              "admit " + f);
        jsonl += entry.str();
        json j = json::parse(entry.str());
        if (j["verdict"] == "admitted") ++admitted;
        if (as_json) std::cout << entry.str();
    }
    if (!out.empty()) spill(out, jsonl);
    if (!as_json)
        std::cout << "admitted " << admitted << "/" << files.size() << " designs"
                  << (out.empty() ? "" : " -> " + out) << "\n";
    return 0;
}

int cmd_partition(const std::string& admitted_path, unsigned long long seed,
                  const std::string& out) {
    CStr manifest;
    check(dft_partition_run(slurp(admitted_path).c_str(), seed, &manifest.p), "partition");
    spill(out, manifest.str());
    spill(out + ".config.json", json{{"seed", seed}, {"admitted", admitted_path}}.dump(2) + "\n");
    std::size_t n = 0;
    std::istringstream ss(manifest.str());
    std::string line;
    while (std::getline(ss, line))
        if (!line.empty()) ++n;
    std::cout << "partitioned " << n << " entries -> " << out << "\n";
    return 0;
}

int cmd_eval(const json& cfg, bool as_json) {
    CStr summary;
    check(dft_eval_run(cfg.dump().c_str(), &summary.p), "eval");
    json s = json::parse(summary.str());
    if (cfg.contains("out_dir")) {
        json echo = cfg;
        spill(cfg["out_dir"].get<std::string>() + "/eval_config.json", echo.dump(2) + "\n");
    }
    if (as_json) {
        std::cout << summary.str();
    } else {
        std::cout << "repaired " << s["repaired"].get<std::size_t>() << "/"
                  << s["total"].get<std::size_t>() << " (rate " << std::fixed
                  << std::setprecision(4) << s["repair_rate"].get<double>() << ")\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dft-forge: DFT violation detection, design embedding, retrieval and "
                 "LLM-based repair for RTL netlists"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(dft_version()));

    std::string config_path;
    app.add_option("--config", config_path, "JSON config file (or DFT_FORGE_CONFIG env var)");

    // lint
    auto* lint = app.add_subcommand("lint", "Detect DFT violations in a netlist JSON");
    std::string lint_design;
    bool lint_json = false, lint_strict = false;
    lint->add_option("design", lint_design, "netlist JSON file")->required();
    lint->add_flag("--json", lint_json, "machine-readable report on stdout");
    lint->add_flag("--strict", lint_strict, "exit 1 when violations are found");

    // vectorize-fit
    auto* vfit = app.add_subcommand("vectorize-fit", "Fit the TF-IDF model on a corpus");
    std::vector<std::string> vfit_docs;
    std::string vfit_dir, vfit_out = "tfidf.json";
    vfit->add_option("docs", vfit_docs, "document files");
    vfit->add_option("--docs-dir", vfit_dir, "directory of .json documents");
    vfit->add_option("--out", vfit_out, "output model path");

    // vectorize
    auto* vec = app.add_subcommand("vectorize", "Transform a design into its feature vector");
    std::string vec_model, vec_design;
    bool vec_json = false;
    vec->add_option("--model", vec_model, "fitted tf-idf model")->required();
    vec->add_option("--design", vec_design, "netlist JSON file")->required();
    vec->add_flag("--json", vec_json, "full vector as JSON");

    // train
    auto* train = app.add_subcommand("train", "Train the autoencoder on the manifest train split");
    std::string train_manifest, train_tfidf, train_out = "model";
    std::size_t train_epochs = 200, train_batch = 16;
    double train_lr = 1e-3, train_margin = 1.0, train_alpha = 0.01, train_beta = 0.01;
    unsigned long long train_seed = 1;
    bool train_no_verify = false;
    train->add_option("--manifest", train_manifest)->required();
    train->add_option("--tfidf", train_tfidf)->required();
    train->add_option("--out-dir", train_out, "output directory");
    train->add_option("--epochs", train_epochs);
    train->add_option("--batch-size", train_batch);
    train->add_option("--lr", train_lr);
    train->add_option("--margin", train_margin);
    train->add_option("--alpha", train_alpha);
    train->add_option("--beta", train_beta);
    train->add_option("--seed", train_seed);
    train->add_flag("--no-verify", train_no_verify, "skip manifest hash verification");

    // index
    auto* index = app.add_subcommand("index", "Build the reference retrieval index");
    std::string idx_manifest, idx_tfidf, idx_encoder, idx_out = "index.json";
    bool idx_no_verify = false;
    index->add_option("--manifest", idx_manifest)->required();
    index->add_option("--tfidf", idx_tfidf)->required();
    index->add_option("--encoder", idx_encoder)->required();
    index->add_option("--out", idx_out);
    index->add_flag("--no-verify", idx_no_verify, "skip manifest hash verification");

    // retrieve
    auto* retr = app.add_subcommand("retrieve", "Find the most similar reference design");
    std::string retr_index, retr_design, retr_tfidf, retr_encoder;
    bool retr_json = false;
    retr->add_option("--index", retr_index)->required();
    retr->add_option("--design", retr_design)->required();
    retr->add_option("--tfidf", retr_tfidf, "override tf-idf model path");
    retr->add_option("--encoder", retr_encoder, "override encoder model path");
    retr->add_flag("--json", retr_json);

    // equiv
    auto* equiv = app.add_subcommand("equiv", "Bounded logic-equivalence check of two netlists");
    std::string eq_a, eq_b;
    std::size_t eq_stimuli = 1024, eq_cycles = 32, eq_maxexh = 16;
    unsigned long long eq_seed = 1;
    bool eq_json = false;
    equiv->add_option("--a", eq_a)->required();
    equiv->add_option("--b", eq_b)->required();
    equiv->add_option("--stimuli", eq_stimuli, "random stimuli count");
    equiv->add_option("--cycles", eq_cycles, "cycles per stimulus");
    equiv->add_option("--max-exhaustive", eq_maxexh, "exhaustive enumeration bit limit");
    equiv->add_option("--seed", eq_seed);
    equiv->add_flag("--json", eq_json);

    // repair
    auto* repair = app.add_subcommand("repair", "Run the iterative LLM repair loop on a design");
    std::string rep_design, rep_index, rep_tfidf, rep_encoder, rep_mock, rep_endpoint, rep_model,
        rep_token_env, rep_templates, rep_synth, rep_workdir, rep_out;
    int rep_k = 5;
    bool rep_no_rag = false, rep_json = false;
    unsigned long long rep_seed = 1;
    repair->add_option("--design", rep_design, "buggy design (Verilog or netlist JSON)")->required();
    repair->add_option("--index", rep_index)->required();
    repair->add_option("--tfidf", rep_tfidf);
    repair->add_option("--encoder", rep_encoder);
    repair->add_option("--mock-llm", rep_mock, "scripted response directory (offline mode)");
    repair->add_option("--endpoint", rep_endpoint, "chat-completion endpoint URL");
    repair->add_option("--model", rep_model, "LLM model name");
    repair->add_option("--token-env", rep_token_env, "env var holding the API token");
    repair->add_option("--templates", rep_templates, "prompt template directory");
    repair->add_option("--synth-cmd", rep_synth, "synthesis command ({in}/{out} placeholders)");
    repair->add_option("--workdir", rep_workdir, "scratch directory for synthesis");
    repair->add_option("--out", rep_out, "write the session JSON here");
    repair->add_option("-K,--max-iterations", rep_k);
    repair->add_option("--seed", rep_seed, "equivalence budget seed");
    repair->add_flag("--no-rag", rep_no_rag, "ablation: omit the retrieved reference pair");
    repair->add_flag("--json", rep_json, "full session JSON on stdout");

    // admit
    auto* admit = app.add_subcommand("admit", "Run the corpus admission pipeline on files");
    std::vector<std::string> adm_files;
    std::string adm_synth, adm_out_dir = "admitted_json", adm_out;
    bool adm_json = false;
    admit->add_option("files", adm_files, "Verilog or netlist JSON files")->required();
    admit->add_option("--synth-cmd", adm_synth);
    admit->add_option("--json-out-dir", adm_out_dir, "where synthesized JSON is written");
    admit->add_option("--out", adm_out, "admission report JSONL");
    admit->add_flag("--json", adm_json);

    // partition
    auto* part = app.add_subcommand("partition", "Stratified train/reference/test split");
    std::string part_admitted, part_out = "manifest.jsonl";
    unsigned long long part_seed = 1;
    part->add_option("--admitted", part_admitted, "admission report JSONL")->required();
    part->add_option("--out", part_out);
    part->add_option("--seed", part_seed);

    // eval
    auto* eval = app.add_subcommand("eval", "Run repair over a manifest split, emit summary CSV");
    std::string ev_manifest, ev_index, ev_tfidf, ev_encoder, ev_mock, ev_endpoint, ev_model,
        ev_token_env, ev_templates, ev_synth, ev_out_dir = "eval_out", ev_split = "test";
    int ev_k = 5;
    std::size_t ev_jobs = 1;
    bool ev_no_rag = false, ev_json = false, ev_no_verify = false;
    unsigned long long ev_seed = 1;
    eval->add_option("--manifest", ev_manifest)->required();
    eval->add_option("--index", ev_index)->required();
    eval->add_option("--tfidf", ev_tfidf);
    eval->add_option("--encoder", ev_encoder);
    eval->add_option("--mock-llm", ev_mock);
    eval->add_option("--endpoint", ev_endpoint);
    eval->add_option("--model", ev_model);
    eval->add_option("--token-env", ev_token_env);
    eval->add_option("--templates", ev_templates);
    eval->add_option("--synth-cmd", ev_synth);
    eval->add_option("--out-dir", ev_out_dir);
    eval->add_option("--split", ev_split);
    eval->add_option("--jobs", ev_jobs, "parallel repair sessions");
    eval->add_option("-K,--max-iterations", ev_k);
    eval->add_option("--seed", ev_seed);
    eval->add_flag("--no-rag", ev_no_rag, "ablation: omit retrieved references");
    eval->add_flag("--json", ev_json);
    eval->add_flag("--no-verify", ev_no_verify, "skip manifest hash verification");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    CliConfig cfg = CliConfig::load(config_path);

    // precedence: flags > env > config file > defaults
    auto merged_budget = [&](CLI::App* sub, std::size_t stimuli, std::size_t cycles,
                             std::size_t maxexh, unsigned long long seed) {
        json b = budget_json(stimuli, cycles, maxexh, seed);
        json from_file = cfg.get_obj("budget");
        for (const char* key : {"random_stimuli", "cycles", "max_exhaustive_inputs"}) {
            const char* flag = key == std::string("random_stimuli") ? "--stimuli"
                               : key == std::string("cycles")       ? "--cycles"
                                                                    : "--max-exhaustive";
            if (from_file.contains(key) && (!sub->get_option_no_throw(flag) ||
                                            sub->get_option_no_throw(flag)->count() == 0))
                b[key] = from_file[key];
        }
        return b;
    };
    auto merged_k = [&](CLI::App* sub, int flag_value) {
        auto* opt = sub->get_option_no_throw("--max-iterations");
        if (opt && opt->count() > 0) return flag_value;
        return cfg.get_int("max_iterations", flag_value);
    };

    auto llm_or_mock = [&](json& out, const std::string& mock, const std::string& endpoint,
                           const std::string& model, const std::string& token_env) {
        if (!mock.empty()) {
            out["mock_llm_dir"] = mock;
            return;
        }
        std::string ep = endpoint.empty() ? cfg.get("endpoint", "") : endpoint;
        if (ep.empty()) die("need --mock-llm or --endpoint (or config/env endpoint)", 2);
        out["llm"] = {{"endpoint", ep},
                      {"model", model.empty() ? cfg.get("model", "") : model},
                      {"token_env", token_env.empty() ? cfg.get("token_env", "") : token_env}};
    };

    try {
        if (*lint) return cmd_lint(lint_design, lint_json, lint_strict);
        if (*vfit) return cmd_vectorize_fit(vfit_docs, vfit_dir, vfit_out);
        if (*vec) return cmd_vectorize(vec_model, vec_design, vec_json);
        if (*train) {
            json tc = {{"epochs", train_epochs}, {"batch_size", train_batch},
                       {"lr", train_lr},         {"margin", train_margin},
                       {"alpha", train_alpha},   {"beta", train_beta},
                       {"seed", train_seed}};
            return cmd_train(train_manifest, train_tfidf, train_out, tc, !train_no_verify);
        }
        if (*index) return cmd_index(idx_manifest, idx_tfidf, idx_encoder, idx_out, !idx_no_verify);
        if (*retr) return cmd_retrieve(retr_index, retr_design, retr_tfidf, retr_encoder, retr_json);
        if (*equiv)
            return cmd_equiv(eq_a, eq_b, merged_budget(equiv, eq_stimuli, eq_cycles, eq_maxexh, eq_seed),
                             eq_json);
        if (*repair) {
            json rc = {{"design_path", rep_design},
                       {"index_path", rep_index},
                       {"max_iterations", merged_k(repair, rep_k)},
                       {"use_rag", !rep_no_rag},
                       {"templates_dir", rep_templates.empty() ? cfg.get("templates_dir", "templates")
                                                               : rep_templates},
                       {"synth_command", rep_synth.empty() ? cfg.get("synth_command", "") : rep_synth},
                       {"budget", merged_budget(repair, 1024, 32, 16, rep_seed)}};
            if (!rep_tfidf.empty()) rc["tfidf_path"] = rep_tfidf;
            if (!rep_encoder.empty()) rc["encoder_path"] = rep_encoder;
            if (!rep_workdir.empty()) rc["workdir"] = rep_workdir;
            if (!rep_out.empty()) rc["session_out"] = rep_out;
            llm_or_mock(rc, rep_mock, rep_endpoint, rep_model, rep_token_env);
            return cmd_repair(rc, rep_out, rep_json);
        }
        if (*admit) return cmd_admit(adm_files, adm_synth, adm_out_dir, adm_out, adm_json);
        if (*part) return cmd_partition(part_admitted, part_seed, part_out);
        if (*eval) {
            json ec = {{"manifest_path", ev_manifest},
                       {"index_path", ev_index},
                       {"split", ev_split},
                       {"jobs", ev_jobs},
                       {"out_dir", ev_out_dir},
                       {"max_iterations", merged_k(eval, ev_k)},
                       {"use_rag", !ev_no_rag},
                       {"verify_hashes", !ev_no_verify},
                       {"templates_dir", ev_templates.empty() ? cfg.get("templates_dir", "templates")
                                                              : ev_templates},
                       {"synth_command", ev_synth.empty() ? cfg.get("synth_command", "") : ev_synth},
                       {"budget", merged_budget(eval, 1024, 32, 16, ev_seed)}};
            if (!ev_tfidf.empty()) ec["tfidf_path"] = ev_tfidf;
            if (!ev_encoder.empty()) ec["encoder_path"] = ev_encoder;
            llm_or_mock(ec, ev_mock, ev_endpoint, ev_model, ev_token_env);
            return cmd_eval(ec, ev_json);
        }
    } catch (const std::exception& e) {
        die(e.what());
    }
    return 2;
}
