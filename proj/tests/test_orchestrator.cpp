#include "doctest.h"

#include <atomic>
#include <filesystem>
#include <thread>

#include "dftforge/orchestrator.hpp"
#include "dftforge/util.hpp"
// must match the library's httplib configuration exactly
#ifdef DFTFORGE_WITH_TLS
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include "httplib.h"
#include "json.hpp"

using namespace dftforge;

namespace {

std::string fixtures() { return FIXTURES_DIR; }

std::string fixture_net(const std::string& name) {
    return read_file(fixtures() + "/netlists/" + name);
}

struct ScenarioRig {
    TfidfModel tfidf;
    AutoencoderModel model;
    ReferenceIndex index;
    RepairConfig cfg;
    std::string target;

    ScenarioRig()
        : tfidf(TfidfModel::fit({fixture_net("scenario_target.json"),
                                 fixture_net("ref_ripple.json"),
                                 fixture_net("ref_ripple.fixed.json"),
                                 fixture_net("ref_intreset.json"),
                                 fixture_net("ref_intreset.fixed.json")})),
          model(AutoencoderModel::init([] {
              AutoencoderConfig c;
              c.seed = 12;
              return c;
          }())) {
        std::vector<ReferenceInput> refs = {
            {"ripple", fixture_net("ref_ripple.json"), fixture_net("ref_ripple.fixed.json"),
             fixture_net("ref_ripple.json"), fixture_net("ref_ripple.fixed.json"), "", "", ""},
            {"intreset", fixture_net("ref_intreset.json"), fixture_net("ref_intreset.fixed.json"),
             fixture_net("ref_intreset.json"), fixture_net("ref_intreset.fixed.json"), "", "", ""}};
        index = ReferenceIndex::build(model, tfidf, refs);
        cfg.templates_dir = TEMPLATES_DIR;
        cfg.max_iterations = 5;
        cfg.budget.random_stimuli = 128;
        cfg.budget.cycles = 12;
        cfg.budget.seed = 3;
        target = fixture_net("scenario_target.json");
    }

    RepairSession run(const std::string& mock_subdir) {
        MockLlmClient llm(fixtures() + "/mock_llm/" + mock_subdir);
        return repair("scenario_target", target, index, model, tfidf, llm, cfg);
    }
};

} // namespace

TEST_CASE("prompt templates load and render deterministically") {
    PromptTemplates tpl = PromptTemplates::load(TEMPLATES_DIR);
    CHECK_FALSE(tpl.task.empty());
    CHECK_FALSE(tpl.background.empty());
    CHECK_FALSE(tpl.error_definitions.empty());

    PromptInputs in;
    in.reference_buggy = "REF_BUGGY";
    in.reference_fixed = "REF_FIXED";
    in.target_source = "TARGET";
    std::string p1 = render_prompt(tpl, in, 1);
    CHECK(p1 == render_prompt(tpl, in, 1)); // byte-identical

    // section order: task, background, definitions, reference pair, target
    auto pos_task = p1.find("## Task");
    auto pos_bg = p1.find("## Testability background");
    auto pos_def = p1.find("## DFT violation types");
    auto pos_ref = p1.find("## Reference design");
    auto pos_fix = p1.find("## Validated repair");
    auto pos_tgt = p1.find("## Design to repair");
    REQUIRE(pos_task != std::string::npos);
    CHECK(pos_task < pos_bg);
    CHECK(pos_bg < pos_def);
    CHECK(pos_def < pos_ref);
    CHECK(pos_ref < pos_fix);
    CHECK(pos_fix < pos_tgt);
    CHECK(p1.find("## Verifier feedback") == std::string::npos); // iteration 1: no feedback

    in.feedback = "LINT SAYS NO";
    std::string p2 = render_prompt(tpl, in, 2);
    CHECK(p2.find("## Verifier feedback") != std::string::npos);
    CHECK(p2.find("LINT SAYS NO") != std::string::npos);

    // no-RAG ablation drops only the reference sections
    in.include_reference = false;
    std::string p3 = render_prompt(tpl, in, 1);
    CHECK(p3.find("## Reference design") == std::string::npos);
    CHECK(p3.find("## Design to repair") != std::string::npos);

    CHECK_THROWS_AS(PromptTemplates::load("/nonexistent/dir"), Error);
}

TEST_CASE("prompt golden file") {
    PromptTemplates tpl = PromptTemplates::load(TEMPLATES_DIR);
    PromptInputs in;
    in.reference_buggy = "module ref; // buggy\nendmodule";
    in.reference_fixed = "module ref; // fixed\nendmodule";
    in.target_source = "module tgt;\nendmodule";
    in.feedback = "lint: [ACNCPI] cell u1: async reset unreachable";
    const std::string got1 = render_prompt(tpl, in, 1);
    const std::string got2 = render_prompt(tpl, in, 2);
    CHECK(got1 == read_file(std::string(GOLDEN_DIR) + "/prompt_iter1.txt"));
    CHECK(got2 == read_file(std::string(GOLDEN_DIR) + "/prompt_iter2.txt"));
}

TEST_CASE("extract_code_block: first fenced block wins, language tag ignored") {
    CHECK(extract_code_block("```json\n{\"a\": 1}\n```").value() == "{\"a\": 1}");
    CHECK(extract_code_block("text\n```\nplain\n```\nmore ```v\nx\n```").value() == "plain");
    CHECK_FALSE(extract_code_block("no fences at all").has_value());
    CHECK_FALSE(extract_code_block("``` unterminated\ncode").has_value());
    CHECK(extract_code_block("```verilog\nmodule m;\nendmodule\n```").value() ==
          "module m;\nendmodule");
}

TEST_CASE("synthesize_to_json: JSON input bypasses the tool") {
    SynthesisHook hook; // no command at all
    SynthResult r = synthesize_to_json(fixture_net("clean_shift_register.json"), hook);
    CHECK(r.ok);
    CHECK(r.json_text.find("\"modules\"") != std::string::npos);
}

TEST_CASE("synthesize_to_json: external tool invocation, success and failure") {
    SynthesisHook ok;
    ok.command = "sh " + fixtures() + "/tools/fake_synth_ok.sh {in} {out}";
    ok.workdir = "synth_test_work";
    SynthResult r = synthesize_to_json("module m(); endmodule", ok);
    REQUIRE(r.ok);
    Netlist nl = parse_netlist(r.json_text);
    CHECK(nl.sequential_cells().size() == 1);

    SynthesisHook fail;
    fail.command = "sh " + fixtures() + "/tools/fake_synth_fail.sh {in} {out}";
    fail.workdir = "synth_test_work";
    r = synthesize_to_json("module m(); endmodule", fail);
    CHECK_FALSE(r.ok);
    CHECK_FALSE(r.tool_missing);
    CHECK(r.failure_report.find("syntax error") != std::string::npos);

    SynthesisHook missing;
    missing.command = "definitely_not_a_real_synth_tool_9931 {in} {out}";
    missing.workdir = "synth_test_work";
    r = synthesize_to_json("module m(); endmodule", missing);
    CHECK_FALSE(r.ok);
    CHECK(r.tool_missing);

    SynthesisHook none; // no command and not JSON
    r = synthesize_to_json("module m(); endmodule", none);
    CHECK_FALSE(r.ok);
    CHECK(r.tool_missing);
    std::filesystem::remove_all("synth_test_work");
}

TEST_CASE("scenario: one-shot success") {
    ScenarioRig rig;
    RepairSession s = rig.run("one_shot");
    CHECK(s.status == RepairStatus::Repaired);
    REQUIRE(s.iterations.size() == 1);
    CHECK(s.iterations[0].lint_clean);
    CHECK(s.iterations[0].equiv_verdict == "EQUIVALENT_BOUNDED");
    CHECK_FALSE(s.final_code.empty());
    CHECK_FALSE(s.reference_id.empty());
    CHECK(s.s_max <= 1.0 + 1e-12);

    // machine-checkable REPAIRED invariant straight from the session
    Netlist fixed = parse_netlist(s.final_code);
    CHECK(lint(fixed).label.clean());
}

TEST_CASE("scenario: two-iteration recovery with verifier feedback") {
    ScenarioRig rig;
    RepairSession s = rig.run("two_iter");
    CHECK(s.status == RepairStatus::Repaired);
    REQUIRE(s.iterations.size() == 2);
    // candidate passed the synthesis stage (JSON bypass) but failed netlist
    // validation; that diagnostic is the iteration's feedback
    CHECK(s.iterations[0].synth_ok);
    CHECK_FALSE(s.iterations[0].lint_reached);
    CHECK(s.iterations[0].feedback.find("$magic") != std::string::npos);
    CHECK(s.iterations[1].equiv_verdict == "EQUIVALENT_BOUNDED");

    // the feedback persisted for iteration 1 is exactly what iteration 2's
    // prompt embeds: re-render and compare digests
    PromptTemplates tpl = PromptTemplates::load(TEMPLATES_DIR);
    const ReferenceEntry* ref = nullptr;
    for (const auto& e : rig.index.entries())
        if (e.id == s.reference_id) ref = &e;
    REQUIRE(ref != nullptr);
    PromptInputs in;
    in.reference_buggy = ref->buggy_source;
    in.reference_fixed = ref->fixed_source;
    in.target_source = rig.target;
    in.feedback = s.iterations[0].feedback;
    CHECK(content_hash(render_prompt(tpl, in, 2)) == s.iterations[1].prompt_digest);
}

TEST_CASE("scenario: exhaustion stops at exactly K=5") {
    ScenarioRig rig;
    RepairSession s = rig.run("exhaust");
    CHECK(s.status == RepairStatus::FailedMaxIter);
    CHECK(s.iterations.size() == 5);
    for (const auto& it : s.iterations) {
        CHECK(it.lint_reached);
        CHECK_FALSE(it.lint_clean);
        CHECK(it.lint_label.y == std::array<int, 4>{1, 0, 0, 0});
        CHECK(it.feedback.find("ACNCPI") != std::string::npos);
    }
}

TEST_CASE("scenario: sessions are bit-reproducible") {
    ScenarioRig rig;
    for (const char* scenario : {"one_shot", "two_iter", "exhaust"}) {
        RepairSession a = rig.run(scenario);
        RepairSession b = rig.run(scenario);
        CHECK(a.to_json() == b.to_json());
    }
}

TEST_CASE("scenario: missing code block becomes explicit feedback") {
    ScenarioRig rig;
    RepairSession s = rig.run("no_block");
    CHECK(s.status == RepairStatus::Repaired);
    REQUIRE(s.iterations.size() == 2);
    CHECK(s.iterations[0].feedback.find("no code block found") != std::string::npos);
}

TEST_CASE("scenario: equivalence counterexample feeds back and loop recovers") {
    ScenarioRig rig;
    RepairSession s = rig.run("wrong_fix");
    CHECK(s.status == RepairStatus::Repaired);
    REQUIRE(s.iterations.size() == 2);
    CHECK(s.iterations[0].lint_clean);
    CHECK(s.iterations[0].equiv_verdict == "COUNTEREXAMPLE");
    CHECK(s.iterations[0].feedback.find("not functionally equivalent") != std::string::npos);
    CHECK(s.iterations[1].equiv_verdict == "EQUIVALENT_BOUNDED");
}

TEST_CASE("scenario: no-RAG ablation omits the reference and still runs") {
    ScenarioRig rig;
    rig.cfg.use_rag = false;
    RepairSession s = rig.run("one_shot");
    CHECK(s.status == RepairStatus::Repaired);
    CHECK_FALSE(s.used_rag);
}

TEST_CASE("scenario: transport failure aborts with a partial session") {
    ScenarioRig rig;
    MockLlmClient empty(fixtures() + "/mock_llm/does_not_exist");
    RepairSession s = repair("t", rig.target, rig.index, rig.model, rig.tfidf, empty, rig.cfg);
    CHECK(s.status == RepairStatus::AbortedTransport);
    CHECK(s.iterations.size() == 1);
    CHECK(s.iterations[0].llm_response.empty());
    CHECK_FALSE(s.note.empty());
}

TEST_CASE("scenario: unsynthesizable original ends FAILED_SYNTH_TOOL without a tool") {
    ScenarioRig rig;
    MockLlmClient llm(fixtures() + "/mock_llm/one_shot");
    RepairSession s =
        repair("verilog_target", "module m(input c); endmodule", rig.index, rig.model,
               rig.tfidf, llm, rig.cfg); // no synth command configured
    CHECK(s.status == RepairStatus::FailedSynthTool);
}

TEST_CASE("session JSON round trip") {
    ScenarioRig rig;
    RepairSession s = rig.run("two_iter");
    RepairSession r = RepairSession::from_json(s.to_json());
    CHECK(r.to_json() == s.to_json());
    CHECK(r.status == s.status);
    CHECK(r.iterations.size() == s.iterations.size());
    CHECK(r.iterations[0].feedback == s.iterations[0].feedback);
}

TEST_CASE("mock llm client: iteration-keyed responses") {
    MockLlmClient llm(fixtures() + "/mock_llm/two_iter");
    std::string r1 = llm.complete({{"user", "x"}});
    std::string r2 = llm.complete({{"user", "x"}});
    CHECK(r1.find("$magic") != std::string::npos);
    CHECK(r2.find("deadff") != std::string::npos);
    CHECK(llm.calls() == 2);
    CHECK_THROWS_WITH_AS(llm.complete({{"user", "x"}}), doctest::Contains("response_3"), Error);
}

TEST_CASE("http llm client: retry on 5xx then success; no retry on 404") {
    httplib::Server server;
    std::atomic<int> hits{0};
    server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        const int n = ++hits;
        nlohmann::json body = nlohmann::json::parse(req.body);
        CHECK(body["model"] == "test-model");
        CHECK(body["messages"][0]["role"] == "user");
        CHECK(req.get_header_value("Authorization") == "Bearer sekret-token");
        if (n == 1) {
            res.status = 500;
            res.set_content("overloaded", "text/plain");
            return;
        }
        nlohmann::json out = {
            {"choices", {{{"message", {{"role", "assistant"}, {"content", "hello back"}}}}}}};
        res.set_content(out.dump(), "application/json");
    });
    server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("ok", "text/plain");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread th([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    setenv("DFT_TEST_LLM_TOKEN", "sekret-token", 1);
    LlmClientSpec spec;
    spec.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
    spec.model = "test-model";
    spec.token_env = "DFT_TEST_LLM_TOKEN";
    spec.max_retries = 2;
    spec.backoff_initial_ms = 1;

    HttpLlmClient client(spec);
    CHECK(client.complete({{"user", "hi"}}) == "hello back");
    CHECK(hits.load() == 2); // one failure, one success

    LlmClientSpec bad = spec;
    bad.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/nope";
    HttpLlmClient bad_client(bad);
    const int before = hits.load();
    CHECK_THROWS_AS(bad_client.complete({{"user", "hi"}}), Error);
    CHECK(hits.load() == before); // 404 is terminal, not retried

    server.stop();
    th.join();
}

TEST_CASE("eval summary csv shape and rate computation") {
    std::vector<EvalRow> rows = {{"d1", RepairStatus::Repaired, 1, 0.93},
                                 {"d2", RepairStatus::FailedMaxIter, 5, 0.41},
                                 {"d3", RepairStatus::Repaired, 2, 0.88},
                                 {"d4", RepairStatus::FailedEquiv, 3, 0.77}};
    EvalSummary s = summarize(rows);
    CHECK(s.total == 4);
    CHECK(s.repaired == 2);
    CHECK(s.repair_rate == doctest::Approx(0.5));
    std::string csv = eval_summary_csv(s);
    CHECK(csv.find("design_id,status,iterations,s_max") == 0);
    CHECK(csv.find("d2,FAILED_MAX_ITER,5,0.410000") != std::string::npos);
}
