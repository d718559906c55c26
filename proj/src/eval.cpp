#include "dftforge/eval.hpp"

#include <atomic>
#include <filesystem>
#include <mutex>
#include <thread>

namespace dftforge {

EvalSummary run_eval(const Manifest& manifest, const ReferenceIndex& index,
                     const AutoencoderModel& model, const TfidfModel& tfidf,
                     const EvalOptions& opt) {
    if (opt.mock_llm_dir.empty() && !opt.llm)
        throw Error("eval: neither a mock directory nor an llm endpoint configured");

    auto entries = manifest.split(opt.split);
    if (entries.empty()) throw Error("eval: split \"" + opt.split + "\" is empty");

    std::vector<EvalRow> rows(entries.size());
    std::vector<std::string> session_files(entries.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string first_error;
    std::mutex error_mu;

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= entries.size() || failed.load()) return;
            const ManifestEntry& e = *entries[i];
            try {
                const std::string source =
                    read_file(!e.source_path.empty() && file_exists(e.source_path)
                                  ? e.source_path
                                  : e.json_path);

                RepairConfig rc = opt.repair;
                if (!opt.out_dir.empty())
                    rc.synth.workdir = opt.out_dir + "/work/" + e.id;

                std::unique_ptr<LlmTransport> transport;
                if (!opt.mock_llm_dir.empty()) {
                    std::string dir = opt.mock_llm_dir + "/" + e.id;
                    if (!std::filesystem::is_directory(dir)) dir = opt.mock_llm_dir;
                    transport = make_mock_client(dir);
                } else {
                    transport = make_http_client(*opt.llm);
                }

                RepairSession s = repair(e.id, source, index, model, tfidf, *transport, rc);
                rows[i] = {e.id, s.status, static_cast<int>(s.iterations.size()), s.s_max};
                if (!opt.out_dir.empty()) {
                    session_files[i] = opt.out_dir + "/sessions/" + e.id + ".json";
                    write_file(session_files[i], s.to_json());
                }
            } catch (const std::exception& ex) {
                std::lock_guard<std::mutex> lk(error_mu);
                if (!failed.exchange(true)) first_error = ex.what();
                return;
            }
        }
    };

    const std::size_t n_threads = std::max<std::size_t>(1, std::min(opt.jobs, entries.size()));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failed.load()) throw Error("eval: " + first_error);

    EvalSummary summary = summarize(std::move(rows));
    if (!opt.out_dir.empty())
        write_file(opt.out_dir + "/summary.csv", eval_summary_csv(summary));
    return summary;
}

} // namespace dftforge
