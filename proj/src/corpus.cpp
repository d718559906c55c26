#include "dftforge/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>

#include "json.hpp"

using nlohmann::json;

namespace dftforge {

std::string Manifest::to_jsonl() const {
    std::string out;
    for (const auto& e : entries) {
        json j = {{"id", e.id},
                  {"source_path", e.source_path},
                  {"json_path", e.json_path},
                  {"label", e.label},
                  {"split", e.split},
                  {"source_hash", e.source_hash},
                  {"json_hash", e.json_hash}};
        out += j.dump() + "\n";
    }
    return out;
}

Manifest Manifest::from_jsonl(const std::string& text) {
    Manifest m;
    for (const auto& line : split_lines(text)) {
        if (trim(line).empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) throw Error("manifest: malformed JSONL line");
        ManifestEntry e;
        try {
            e.id = j.at("id").get<std::string>();
            e.source_path = j.value("source_path", "");
            e.json_path = j.at("json_path").get<std::string>();
            e.label = j.at("label").get<std::array<int, 4>>();
            e.split = j.at("split").get<std::string>();
            e.source_hash = j.value("source_hash", "");
            e.json_hash = j.value("json_hash", "");
        } catch (const json::exception& ex) {
            throw Error(std::string("manifest: bad entry: ") + ex.what());
        }
        if (e.split != "train" && e.split != "reference" && e.split != "test")
            throw Error("manifest: entry " + e.id + " has bad split \"" + e.split + "\"");
        int bits = e.label[0] + e.label[1] + e.label[2] + e.label[3];
        if (bits != 1) throw Error("manifest: entry " + e.id + " must have exactly one label bit");
        m.entries.push_back(std::move(e));
    }
    return m;
}

void Manifest::verify_hashes() const {
    for (const auto& e : entries) {
        if (!e.json_path.empty() && !e.json_hash.empty()) {
            if (content_hash(read_file(e.json_path)) != e.json_hash)
                throw Error("manifest: json for entry " + e.id + " drifted (" + e.json_path + ")");
        }
        if (!e.source_path.empty() && !e.source_hash.empty()) {
            if (content_hash(read_file(e.source_path)) != e.source_hash)
                throw Error("manifest: source for entry " + e.id + " drifted (" + e.source_path + ")");
        }
    }
}

std::vector<const ManifestEntry*> Manifest::split(const std::string& name) const {
    std::vector<const ManifestEntry*> out;
    for (const auto& e : entries)
        if (e.split == name) out.push_back(&e);
    return out;
}

const char* admission_verdict_name(AdmissionVerdict v) {
    switch (v) {
        case AdmissionVerdict::Admitted: return "admitted";
        case AdmissionVerdict::NoLogic: return "no-logic";
        case AdmissionVerdict::SynthFail: return "synth-fail";
        case AdmissionVerdict::ZeroViolations: return "zero-violations";
        case AdmissionVerdict::MultiViolation: return "multi-violation";
        case AdmissionVerdict::UnsupportedErrorType: return "unsupported-error-type";
    }
    return "?";
}

namespace {

std::optional<AdmissionVerdict> admission_verdict_from(const std::string& s) {
    for (AdmissionVerdict v :
         {AdmissionVerdict::Admitted, AdmissionVerdict::NoLogic, AdmissionVerdict::SynthFail,
          AdmissionVerdict::ZeroViolations, AdmissionVerdict::MultiViolation,
          AdmissionVerdict::UnsupportedErrorType})
        if (s == admission_verdict_name(v)) return v;
    return std::nullopt;
}

} // namespace

std::string AdmissionEntry::to_json() const {
    json j = {{"id", id},
              {"path", path},
              {"verdict", admission_verdict_name(verdict)},
              {"json_path", json_path},
              {"diagnostics", diagnostics}};
    if (label) j["label"] = dft_error_kind_name(*label);
    return j.dump();
}

AdmissionEntry AdmissionEntry::from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw Error("admission entry: malformed JSON");
    AdmissionEntry e;
    if (!j.contains("id") || !j.contains("verdict"))
        throw Error("admission entry: missing id/verdict");
    e.id = j.at("id").get<std::string>();
    e.path = j.value("path", "");
    auto v = admission_verdict_from(j.at("verdict").get<std::string>());
    if (!v) throw Error("admission entry: bad verdict");
    e.verdict = *v;
    e.json_path = j.value("json_path", "");
    e.diagnostics = j.value("diagnostics", "");
    if (j.contains("label")) {
        auto k = dft_error_kind_from(j["label"].get<std::string>());
        if (!k) throw Error("admission entry: bad label");
        e.label = k;
    }
    return e;
}

AdmissionEntry admit_file(const std::string& path, const SynthesisHook& synth,
                          const std::string& json_out_dir) {
    AdmissionEntry e;
    e.path = path;
    e.id = std::filesystem::path(path).stem().string();

    std::string source;
    try {
        source = read_file(path);
    } catch (const Error& err) {
        e.verdict = AdmissionVerdict::SynthFail;
        e.diagnostics = err.what();
        return e;
    }

    SynthResult sr = synthesize_to_json(source, synth);
    if (!sr.ok) {
        e.verdict = AdmissionVerdict::SynthFail;
        e.diagnostics = sr.failure_report;
        return e;
    }

    Netlist nl;
    try {
        nl = parse_netlist(sr.json_text);
    } catch (const Error& err) {
        e.verdict = AdmissionVerdict::SynthFail;
        e.diagnostics = std::string("netlist validation: ") + err.what();
        return e;
    }

    if (nl.cell_count() == 0) {
        e.verdict = AdmissionVerdict::NoLogic;
        e.diagnostics = "no cells after synthesis (wrapper or testbench?)";
        return e;
    }

    LintResult lr = lint(nl);
    CollapseResult cr = collapse_label(lr);
    switch (cr.status) {
        case CollapseResult::Status::Clean:
            e.verdict = AdmissionVerdict::ZeroViolations;
            return e;
        case CollapseResult::Status::Multi:
            e.verdict = AdmissionVerdict::MultiViolation;
            e.diagnostics = lint_report_text(nl, lr);
            return e;
        case CollapseResult::Status::Single:
            break;
    }

    e.verdict = AdmissionVerdict::Admitted;
    e.label = cr.kind;
    if (std::filesystem::path(path).extension() == ".json") {
        e.json_path = path;
    } else {
        e.json_path = (std::filesystem::path(json_out_dir) / (e.id + ".json")).string();
        write_file(e.json_path, sr.json_text);
    }
    return e;
}

Manifest partition(const std::vector<AdmissionEntry>& admitted, const PartitionConfig& cfg,
                   std::vector<std::string>* warnings) {
    std::map<DftErrorKind, std::vector<const AdmissionEntry*>> strata;
    for (const auto& e : admitted) {
        if (e.verdict != AdmissionVerdict::Admitted) continue;
        if (!e.label) throw Error("partition: admitted entry " + e.id + " lacks a label");
        strata[*e.label].push_back(&e);
    }
    if (strata.empty()) throw Error("partition: no admitted entries");

    DetRng rng(cfg.seed);
    Manifest m;
    for (auto& [kind, group] : strata) {
        // Deterministic base order before the seeded shuffle.
        std::sort(group.begin(), group.end(),
                  [](const AdmissionEntry* a, const AdmissionEntry* b) { return a->id < b->id; });
        rng.shuffle(group);

        const std::size_t n = group.size();
        std::size_t n_train = static_cast<std::size_t>(
            std::lround(cfg.train_fraction * static_cast<double>(n)));
        std::size_t n_ref = static_cast<std::size_t>(
            std::lround(cfg.reference_fraction * static_cast<double>(n)));
        // Every represented label must appear in train.
        n_train = std::max<std::size_t>(n_train, 1);
        if (n_train > n) n_train = n;
        if (n_train + n_ref > n) n_ref = n - n_train;
        if (n < 3 && warnings)
            warnings->push_back(std::string("label ") + dft_error_kind_name(kind) + " has only " +
                                std::to_string(n) + " entries; best-effort split");

        for (std::size_t i = 0; i < n; ++i) {
            const AdmissionEntry* src = group[i];
            ManifestEntry e;
            e.id = src->id;
            e.source_path = src->path;
            e.json_path = src->json_path;
            e.label[static_cast<int>(kind) - 1] = 1;
            e.split = i < n_train ? "train" : (i < n_train + n_ref ? "reference" : "test");
            if (!src->path.empty() && file_exists(src->path))
                e.source_hash = content_hash(read_file(src->path));
            if (!src->json_path.empty() && file_exists(src->json_path))
                e.json_hash = content_hash(read_file(src->json_path));
            m.entries.push_back(std::move(e));
        }
    }
    std::sort(m.entries.begin(), m.entries.end(),
              [](const ManifestEntry& a, const ManifestEntry& b) { return a.id < b.id; });
    return m;
}

} // namespace dftforge
