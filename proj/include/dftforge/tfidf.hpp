#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "dftforge/util.hpp"

namespace dftforge {

constexpr std::size_t kFeatureDim = 512;

// Lowercases, then emits maximal [a-z0-9_] runs of length >= 2. JSON
// punctuation and one-character tokens (single digits, braces) drop out.
std::vector<std::string> tokenize(const std::string& text);

struct FeatureVector {
    std::vector<double> x; // always kFeatureDim wide, zero-padded
    bool all_oov = false;  // document had no in-vocabulary term
};

// Fitted TF-IDF model: vocabulary of at most kFeatureDim terms (sorted
// lexicographically) with smoothed idf weights. Immutable after fit.
class TfidfModel {
public:
    // vocabulary = top kFeatureDim terms by total corpus count, ties broken
    // lexicographically ascending; idf(t) = ln((1+n)/(1+df(t))) + 1.
    static TfidfModel fit(const std::vector<std::string>& corpus);

    // Sublinear tf (1 + ln tf) * idf, then L2 normalization. Out-of-vocabulary
    // terms are ignored; an all-OOV document yields the zero vector.
    FeatureVector transform(const std::string& text) const;

    const std::vector<std::string>& vocabulary() const { return vocab_; }
    const std::vector<double>& idf() const { return idf_; }
    const std::string& fingerprint() const { return fingerprint_; }

    std::string to_json() const;
    static TfidfModel from_json(const std::string& text);

private:
    std::vector<std::string> vocab_;
    std::vector<double> idf_;
    std::unordered_map<std::string, std::size_t> index_;
    std::string fingerprint_; // hash of the corpus the model was fitted on

    void rebuild_index();
};

} // namespace dftforge
