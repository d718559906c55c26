/*
 * dft-forge C API.
 *
 * The toolkit core is C++; this header is the stable boundary for the CLI
 * and for other language bindings. Conventions:
 *   - every fallible call returns dft_status; DFT_OK is 0
 *   - on failure, dft_last_error() returns a thread-local message
 *   - objects are opaque handles with explicit _free functions
 *   - structured data crosses the boundary as JSON strings; any char* the
 *     library hands out must be released with dft_string_free()
 */
#ifndef DFTFORGE_H
#define DFTFORGE_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define DFT_API __declspec(dllexport)
#else
#define DFT_API __attribute__((visibility("default")))
#endif

typedef enum dft_status {
    DFT_OK = 0,
    DFT_ERR_INVALID_ARG = 1,
    DFT_ERR_PARSE = 2,
    DFT_ERR_IO = 3,
    DFT_ERR_DOMAIN = 4,
    DFT_ERR_INTERNAL = 5
} dft_status;

typedef struct dft_netlist dft_netlist;
typedef struct dft_tfidf dft_tfidf;
typedef struct dft_autoencoder dft_autoencoder;
typedef struct dft_index dft_index;

DFT_API const char* dft_version(void);
DFT_API const char* dft_last_error(void);
DFT_API void dft_string_free(char* s);

DFT_API size_t dft_feature_dim(void); /* TF-IDF feature width (512) */

/* --- netlist ------------------------------------------------------------ */

/* Parses the netlist JSON dialect, flattens hierarchy and validates. */
DFT_API dft_status dft_netlist_parse(const char* json_text, dft_netlist** out);
DFT_API void dft_netlist_free(dft_netlist* nl);
DFT_API dft_status dft_netlist_to_json(const dft_netlist* nl, char** out_json);
/* {"top": ..., "cells": n, "nets": n, "sequential_cells": n} */
DFT_API dft_status dft_netlist_stats(const dft_netlist* nl, char** out_json);

/* --- DFT lint ------------------------------------------------------------ */

/* {"violations":[{kind,cell,bit,explanation}...], "label":[0|1 x4]} */
DFT_API dft_status dft_lint_run(const dft_netlist* nl, char** out_report_json);
/* Human-readable rendering, also used verbatim as repair-loop feedback. */
DFT_API dft_status dft_lint_text(const dft_netlist* nl, char** out_text);

/* --- TF-IDF vectorizer ---------------------------------------------------- */

DFT_API dft_status dft_tfidf_fit(const char* const* docs, size_t n_docs, dft_tfidf** out);
DFT_API dft_status dft_tfidf_to_json(const dft_tfidf* m, char** out_json);
DFT_API dft_status dft_tfidf_from_json(const char* json_text, dft_tfidf** out);
DFT_API void dft_tfidf_free(dft_tfidf* m);
DFT_API size_t dft_tfidf_vocab_size(const dft_tfidf* m);
/* out_x must hold dft_feature_dim() doubles; *out_all_oov set to 1 when the
 * document has no in-vocabulary term (zero vector). */
DFT_API dft_status dft_tfidf_transform(const dft_tfidf* m, const char* doc, double* out_x,
                                       int* out_all_oov);

/* --- autoencoder ----------------------------------------------------------- */

/* X: n_samples rows of dft_feature_dim() doubles; Y: n_samples rows of 4
 * one-hot doubles. config_json accepts the training config fields (epochs,
 * batch_size, lr, margin, alpha, beta, seed, ...); pass NULL for defaults.
 * out_log_csv (optional) receives the per-epoch loss log. */
DFT_API dft_status dft_autoencoder_train(const double* X, const double* Y, size_t n_samples,
                                         const char* config_json, char** out_log_csv,
                                         dft_autoencoder** out);
DFT_API dft_status dft_autoencoder_to_json(const dft_autoencoder* m, char** out_json);
DFT_API dft_status dft_autoencoder_from_json(const char* json_text, dft_autoencoder** out);
DFT_API void dft_autoencoder_free(dft_autoencoder* m);
DFT_API size_t dft_autoencoder_input_dim(const dft_autoencoder* m);
DFT_API size_t dft_autoencoder_embed_dim(const dft_autoencoder* m);
DFT_API dft_status dft_autoencoder_encode(const dft_autoencoder* m, const double* x,
                                          size_t x_len, double* out_z, size_t z_len);

/* --- reference index -------------------------------------------------------- */

/* refs_json: [{"id", "buggy_source", "fixed_source", "json_repr",
 *              "fixed_json_repr", "buggy_path"?, "fixed_path"?, "json_path"?}].
 * Every fixed design must lint clean; every json_repr must parse. */
DFT_API dft_status dft_index_build(const dft_autoencoder* model, const dft_tfidf* tfidf,
                                   const char* refs_json, dft_index** out);
DFT_API dft_status dft_index_to_json(const dft_index* idx, char** out_json);
DFT_API dft_status dft_index_from_json(const char* json_text, dft_index** out);
DFT_API void dft_index_free(dft_index* idx);
DFT_API size_t dft_index_size(const dft_index* idx);
/* Model provenance stored in the index so loads are self-contained. */
DFT_API dft_status dft_index_set_model_paths(dft_index* idx, const char* tfidf_path,
                                             const char* encoder_path);
/* {"size", "tfidf_path", "encoder_path", "ids":[...]} */
DFT_API dft_status dft_index_info(const dft_index* idx, char** out_json);
/* {"best_id", "best_index", "s_max", "scores":[...]} ties break to lowest id */
DFT_API dft_status dft_retrieve(const dft_index* idx, const double* z, size_t z_len,
                                char** out_result_json);

/* --- bounded equivalence ------------------------------------------------------ */

/* budget_json: {"max_exhaustive_inputs", "random_stimuli", "cycles", "seed"};
 * NULL for defaults. Returns the verdict JSON
 * {"verdict", "stimuli_run", "skipped", "counterexample"?, "reason"?}. */
DFT_API dft_status dft_check_equivalence(const dft_netlist* a, const dft_netlist* b,
                                         const char* budget_json, char** out_verdict_json);

/* --- corpus tooling ------------------------------------------------------------ */

/* Admission pipeline for one file (Verilog or netlist JSON). synth_command
 * may be NULL (JSON-native only); json_out_dir receives synthesized JSON. */
DFT_API dft_status dft_admit_file(const char* path, const char* synth_command,
                                  const char* json_out_dir, char** out_entry_json);
/* admitted_jsonl: one admission entry per line; returns the manifest JSONL. */
DFT_API dft_status dft_partition_run(const char* admitted_jsonl, unsigned long long seed,
                                     char** out_manifest_jsonl);
/* Loads a manifest; verify != 0 re-hashes every referenced file and fails
 * hard on drift. Returns the manifest JSONL. */
DFT_API dft_status dft_manifest_load(const char* path, int verify, char** out_jsonl);

/* --- repair orchestration -------------------------------------------------------- */

/* config_json:
 * {
 *   "design_id": str, "design_path": str | "design_source": str,
 *   "index_path": str, "tfidf_path": str?, "encoder_path": str?,
 *   "mock_llm_dir": str | "llm": {"endpoint","model","token_env",...},
 *   "max_iterations": int, "synth_command": str?, "workdir": str?,
 *   "templates_dir": str, "budget": {...}, "use_rag": bool,
 *   "session_out": str?
 * }
 * Returns the full session JSON. */
DFT_API dft_status dft_repair_run(const char* config_json, char** out_session_json);

/* Batch repair over a manifest split. config_json adds to the above:
 * {"manifest_path", "split"?, "jobs"?, "out_dir"?, "verify_hashes"?}.
 * Returns {"total","repaired","repair_rate","csv"} and writes out_dir files. */
DFT_API dft_status dft_eval_run(const char* config_json, char** out_summary_json);

#ifdef __cplusplus
}
#endif

#endif /* DFTFORGE_H */
