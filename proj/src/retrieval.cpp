#include "dftforge/retrieval.hpp"

#include <cmath>

#include "json.hpp"

using nlohmann::json;

namespace dftforge {

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw Error("cosine: dimension mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) throw Error("cosine: zero-norm input");
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

ReferenceIndex ReferenceIndex::build(const AutoencoderModel& model, const TfidfModel& tfidf,
                                     const std::vector<ReferenceInput>& refs) {
    if (refs.empty()) throw Error("reference index: empty reference list");
    ReferenceIndex idx;
    for (const auto& r : refs) {
        Netlist fixed_nl = parse_netlist(r.fixed_json_repr);
        LintResult fixed_lint = lint(fixed_nl);
        if (!fixed_lint.label.clean())
            throw Error("reference " + r.id + ": fixed design is not lint-clean");

        Netlist buggy_nl = parse_netlist(r.json_repr);
        LintResult buggy_lint = lint(buggy_nl);
        // corpus label: collapsed to the dominant kind for single-defect designs
        LabelVector label = buggy_lint.label;
        CollapseResult collapsed = collapse_label(buggy_lint);
        if (collapsed.status == CollapseResult::Status::Single) {
            label = LabelVector{};
            label[collapsed.kind] = 1;
        }

        FeatureVector fv = tfidf.transform(r.json_repr);
        if (fv.all_oov)
            throw Error("reference " + r.id + ": JSON has no in-vocabulary terms (zero embedding)");
        ReferenceEntry e;
        e.id = r.id;
        e.buggy_source = r.buggy_source;
        e.fixed_source = r.fixed_source;
        e.json_repr = r.json_repr;
        e.label = label;
        e.embedding = model.encode(fv.x);
        double n = 0.0;
        for (double v : e.embedding) n += v * v;
        if (n == 0.0) throw Error("reference " + r.id + ": zero embedding");
        e.buggy_path = r.buggy_path;
        e.fixed_path = r.fixed_path;
        e.json_path = r.json_path;
        e.buggy_hash = content_hash(r.buggy_source);
        e.fixed_hash = content_hash(r.fixed_source);
        e.json_hash = content_hash(r.json_repr);
        idx.entries_.push_back(std::move(e));
    }
    return idx;
}

SimilarityResult ReferenceIndex::retrieve(const std::vector<double>& query) const {
    if (entries_.empty()) throw Error("retrieve: empty index");
    SimilarityResult res;
    res.scores.reserve(entries_.size());
    for (const auto& e : entries_) res.scores.push_back(cosine(query, e.embedding));
    res.best_index = 0;
    for (std::size_t i = 1; i < entries_.size(); ++i) {
        const double s = res.scores[i];
        const double best = res.scores[res.best_index];
        if (s > best || (s == best && entries_[i].id < entries_[res.best_index].id))
            res.best_index = i;
    }
    res.s_max = res.scores[res.best_index];
    return res;
}

std::vector<std::size_t> ReferenceIndex::retrieve_top_k(const std::vector<double>& query,
                                                        std::size_t k) const {
    SimilarityResult res = retrieve(query);
    std::vector<std::size_t> order(entries_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (res.scores[a] != res.scores[b]) return res.scores[a] > res.scores[b];
        return entries_[a].id < entries_[b].id;
    });
    if (order.size() > k) order.resize(k);
    return order;
}

std::string ReferenceIndex::to_json() const {
    json jentries = json::array();
    for (const auto& e : entries_) {
        jentries.push_back({{"id", e.id},
                            {"buggy_source", e.buggy_source},
                            {"fixed_source", e.fixed_source},
                            {"json_repr", e.json_repr},
                            {"label", e.label.y},
                            {"embedding", e.embedding},
                            {"buggy_path", e.buggy_path},
                            {"fixed_path", e.fixed_path},
                            {"json_path", e.json_path},
                            {"buggy_hash", e.buggy_hash},
                            {"fixed_hash", e.fixed_hash},
                            {"json_hash", e.json_hash}});
    }
    json root = {{"version", 1},
                 {"kind", "reference-index"},
                 {"tfidf_path", tfidf_path},
                 {"encoder_path", encoder_path},
                 {"entries", jentries}};
    return root.dump() + "\n";
}

ReferenceIndex ReferenceIndex::from_json(const std::string& text) {
    json root = json::parse(text, nullptr, false);
    if (root.is_discarded()) throw Error("reference index: malformed JSON");
    if (root.value("version", 0) != 1 || root.value("kind", "") != "reference-index")
        throw Error("reference index: unsupported version or kind");
    ReferenceIndex idx;
    idx.tfidf_path = root.value("tfidf_path", "");
    idx.encoder_path = root.value("encoder_path", "");
    if (!root.contains("entries") || !root["entries"].is_array())
        throw Error("reference index: missing entries array");
    for (const auto& je : root["entries"]) {
        ReferenceEntry e;
        if (!je.contains("id") || !je.contains("label") || !je.contains("embedding"))
            throw Error("reference index: entry missing id/label/embedding");
        e.id = je.at("id").get<std::string>();
        e.buggy_source = je.value("buggy_source", "");
        e.fixed_source = je.value("fixed_source", "");
        e.json_repr = je.value("json_repr", "");
        auto lab = je.at("label").get<std::array<int, 4>>();
        e.label.y = lab;
        e.embedding = je.at("embedding").get<std::vector<double>>();
        e.buggy_path = je.value("buggy_path", "");
        e.fixed_path = je.value("fixed_path", "");
        e.json_path = je.value("json_path", "");
        e.buggy_hash = je.value("buggy_hash", "");
        e.fixed_hash = je.value("fixed_hash", "");
        e.json_hash = je.value("json_hash", "");
        // Drift check: stored sources must still match their hashes.
        if (!e.buggy_source.empty() && content_hash(e.buggy_source) != e.buggy_hash)
            throw Error("reference index: entry " + e.id + " buggy source drifted");
        if (!e.fixed_source.empty() && content_hash(e.fixed_source) != e.fixed_hash)
            throw Error("reference index: entry " + e.id + " fixed source drifted");
        if (!e.json_repr.empty() && content_hash(e.json_repr) != e.json_hash)
            throw Error("reference index: entry " + e.id + " json drifted");
        idx.entries_.push_back(std::move(e));
    }
    if (idx.entries_.empty()) throw Error("reference index: no entries");
    return idx;
}

} // namespace dftforge
