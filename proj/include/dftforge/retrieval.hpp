#pragma once

#include <string>
#include <vector>

#include "dftforge/autoencoder.hpp"
#include "dftforge/lint.hpp"
#include "dftforge/tfidf.hpp"

namespace dftforge {

double cosine(const std::vector<double>& a, const std::vector<double>& b);

// Input triple for index construction. Sources are carried as text; the
// fixed design must come with its own netlist JSON so it can be verified
// lint-clean.
struct ReferenceInput {
    std::string id;
    std::string buggy_source;
    std::string fixed_source;
    std::string json_repr;       // netlist JSON of the buggy design (embedded)
    std::string fixed_json_repr; // netlist JSON of the fixed design (verified)
    std::string buggy_path, fixed_path, json_path; // provenance, stored in the index
};

struct ReferenceEntry {
    std::string id;
    std::string buggy_source;
    std::string fixed_source;
    std::string json_repr;
    LabelVector label;            // lint label of the buggy design
    std::vector<double> embedding; // z_r, embed_dim wide, norm > 0
    std::string buggy_path, fixed_path, json_path;
    std::string buggy_hash, fixed_hash, json_hash; // drift detection
};

struct SimilarityResult {
    std::vector<double> scores; // one per entry, same order as the index
    std::size_t best_index = 0;
    double s_max = 0.0;
};

// Immutable embedding store over the reference set; brute-force linear scan
// (reference sets are a few dozen entries).
class ReferenceIndex {
public:
    // Precomputes embeddings via encode(transform(json_repr)). Rejects
    // lint-dirty fixes, unparseable JSON and zero embeddings.
    static ReferenceIndex build(const AutoencoderModel& model, const TfidfModel& tfidf,
                                const std::vector<ReferenceInput>& refs);

    // Full score vector + argmax; ties broken by lowest id.
    SimilarityResult retrieve(const std::vector<double>& query) const;

    // Top-k variant (k=1 is what the repair loop uses).
    std::vector<std::size_t> retrieve_top_k(const std::vector<double>& query,
                                            std::size_t k) const;

    const std::vector<ReferenceEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

    // Paths of the models the index was built with, for self-contained loads.
    std::string tfidf_path, encoder_path;

    std::string to_json() const;
    static ReferenceIndex from_json(const std::string& text);

private:
    std::vector<ReferenceEntry> entries_;
};

} // namespace dftforge
