#pragma once

// Reference TF-IDF oracle, kept deliberately independent of the library
// implementation: string-keyed maps end to end, no shared helpers beyond the
// tokenizer contract (lowercase [a-z0-9_]{2,} runs). Semantics: smoothed idf
// ln((1+n)/(1+df)) + 1, sublinear tf (1 + ln tf), L2 norm, top-512 features
// by total corpus count with lexicographic ascending tie-break.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace ref_tfidf {

inline std::vector<std::string> split_terms(const std::string& text) {
    std::vector<std::string> out;
    std::string run;
    auto flush = [&]() {
        if (run.size() >= 2) out.push_back(run);
        run.clear();
    };
    for (char raw : text) {
        const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(raw)));
        const bool keep = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
        if (keep) run.push_back(c);
        else flush();
    }
    flush();
    return out;
}

struct Model {
    std::map<std::string, double> idf;          // term -> idf
    std::map<std::string, std::size_t> column;  // term -> vector index
    std::size_t width = 0;
};

inline Model fit(const std::vector<std::string>& corpus, std::size_t max_features = 512) {
    std::map<std::string, long long> totals;
    std::map<std::string, long long> doc_freq;
    for (const auto& doc : corpus) {
        std::map<std::string, long long> counts;
        for (const auto& t : split_terms(doc)) counts[t] += 1;
        for (const auto& [t, n] : counts) {
            totals[t] += n;
            doc_freq[t] += 1;
        }
    }

    std::vector<std::string> terms;
    for (const auto& [t, n] : totals) terms.push_back(t);
    std::sort(terms.begin(), terms.end(), [&](const std::string& a, const std::string& b) {
        if (totals[a] != totals[b]) return totals[a] > totals[b];
        return a < b;
    });
    if (terms.size() > max_features) terms.resize(max_features);
    std::sort(terms.begin(), terms.end());

    Model m;
    m.width = max_features;
    const double n_docs = static_cast<double>(corpus.size());
    for (std::size_t i = 0; i < terms.size(); ++i) {
        m.column[terms[i]] = i;
        m.idf[terms[i]] = std::log((1.0 + n_docs) / (1.0 + static_cast<double>(doc_freq[terms[i]]))) + 1.0;
    }
    return m;
}

inline std::vector<double> transform(const Model& m, const std::string& doc) {
    std::map<std::string, long long> counts;
    for (const auto& t : split_terms(doc))
        if (m.column.count(t)) counts[t] += 1;

    std::vector<double> v(m.width, 0.0);
    double sumsq = 0.0;
    for (const auto& [t, n] : counts) {
        const double w = (1.0 + std::log(static_cast<double>(n))) * m.idf.at(t);
        v[m.column.at(t)] = w;
        sumsq += w * w;
    }
    if (sumsq > 0.0) {
        const double norm = std::sqrt(sumsq);
        for (double& x : v) x /= norm;
    }
    return v;
}

} // namespace ref_tfidf
