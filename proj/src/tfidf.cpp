#include "dftforge/tfidf.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "json.hpp"

using nlohmann::json;

namespace dftforge {

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char raw : text) {
        char c = static_cast<char>(std::tolower(static_cast<unsigned char>(raw)));
        if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_') {
            cur.push_back(c);
        } else {
            if (cur.size() >= 2) out.push_back(cur);
            cur.clear();
        }
    }
    if (cur.size() >= 2) out.push_back(cur);
    return out;
}

TfidfModel TfidfModel::fit(const std::vector<std::string>& corpus) {
    if (corpus.empty()) throw Error("tfidf fit: empty corpus");

    // std::map keeps terms sorted, which makes the tie-break below stable.
    std::map<std::string, std::size_t> total_count;
    std::map<std::string, std::size_t> doc_freq;
    std::string fp_accum;
    for (const auto& doc : corpus) {
        std::map<std::string, std::size_t> local;
        for (const auto& t : tokenize(doc)) ++local[t];
        for (const auto& [t, n] : local) {
            total_count[t] += n;
            ++doc_freq[t];
        }
        fp_accum += content_hash(doc);
    }

    std::vector<std::pair<std::string, std::size_t>> ranked(total_count.begin(),
                                                            total_count.end());
    // Higher total count first; ties lexicographically ascending (already the
    // relative order of equal counts thanks to the stable sort over a sorted map).
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    if (ranked.size() > kFeatureDim) ranked.resize(kFeatureDim);

    TfidfModel m;
    for (const auto& [t, n] : ranked) m.vocab_.push_back(t);
    std::sort(m.vocab_.begin(), m.vocab_.end());

    const double n_docs = static_cast<double>(corpus.size());
    m.idf_.resize(m.vocab_.size());
    for (std::size_t i = 0; i < m.vocab_.size(); ++i) {
        const double df = static_cast<double>(doc_freq.at(m.vocab_[i]));
        m.idf_[i] = std::log((1.0 + n_docs) / (1.0 + df)) + 1.0;
    }
    m.fingerprint_ = content_hash(fp_accum);
    m.rebuild_index();
    return m;
}

void TfidfModel::rebuild_index() {
    index_.clear();
    for (std::size_t i = 0; i < vocab_.size(); ++i) index_[vocab_[i]] = i;
}

FeatureVector TfidfModel::transform(const std::string& text) const {
    FeatureVector fv;
    fv.x.assign(kFeatureDim, 0.0);

    std::unordered_map<std::size_t, std::size_t> tf;
    for (const auto& t : tokenize(text)) {
        auto it = index_.find(t);
        if (it != index_.end()) ++tf[it->second];
    }
    if (tf.empty()) {
        fv.all_oov = true;
        return fv;
    }
    double norm_sq = 0.0;
    for (const auto& [idx, n] : tf) {
        const double w = (1.0 + std::log(static_cast<double>(n))) * idf_[idx];
        fv.x[idx] = w;
        norm_sq += w * w;
    }
    const double norm = std::sqrt(norm_sq);
    for (const auto& [idx, n] : tf) fv.x[idx] /= norm;
    return fv;
}

std::string TfidfModel::to_json() const {
    json root = {{"version", 1},
                 {"kind", "tfidf-model"},
                 {"fitted_on", fingerprint_},
                 {"vocabulary", vocab_},
                 {"idf", idf_}};
    return root.dump() + "\n";
}

TfidfModel TfidfModel::from_json(const std::string& text) {
    json root = json::parse(text, nullptr, false);
    if (root.is_discarded()) throw Error("tfidf model: malformed JSON");
    if (!root.contains("version") || root["version"].get<int>() != 1 ||
        root.value("kind", "") != "tfidf-model")
        throw Error("tfidf model: unsupported version or kind");
    TfidfModel m;
    m.vocab_ = root.at("vocabulary").get<std::vector<std::string>>();
    m.idf_ = root.at("idf").get<std::vector<double>>();
    m.fingerprint_ = root.value("fitted_on", "");
    if (m.vocab_.size() != m.idf_.size())
        throw Error("tfidf model: vocabulary/idf size mismatch");
    if (m.vocab_.size() > kFeatureDim)
        throw Error("tfidf model: vocabulary exceeds feature dimension");
    if (!std::is_sorted(m.vocab_.begin(), m.vocab_.end()))
        throw Error("tfidf model: vocabulary not sorted");
    m.rebuild_index();
    return m;
}

} // namespace dftforge
