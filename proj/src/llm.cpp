#include "dftforge/llm.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#ifdef DFTFORGE_WITH_TLS
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include "httplib.h"
#include "json.hpp"

using nlohmann::json;

namespace dftforge {

std::string LlmClientSpec::to_json() const {
    json j = {{"endpoint", endpoint},
              {"model", model},
              {"token_env", token_env},
              {"timeout_seconds", timeout_seconds},
              {"max_retries", max_retries},
              {"backoff_initial_ms", backoff_initial_ms}};
    return j.dump();
}

LlmClientSpec LlmClientSpec::from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw Error("llm spec: malformed JSON");
    LlmClientSpec s;
    s.endpoint = j.value("endpoint", "");
    s.model = j.value("model", "");
    s.token_env = j.value("token_env", "");
    s.timeout_seconds = j.value("timeout_seconds", s.timeout_seconds);
    s.max_retries = j.value("max_retries", s.max_retries);
    s.backoff_initial_ms = j.value("backoff_initial_ms", s.backoff_initial_ms);
    return s;
}

namespace {

struct ParsedUrl {
    std::string origin; // scheme://host[:port]
    std::string path;
};

ParsedUrl split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw Error("llm endpoint: missing scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    ParsedUrl p;
    if (path_start == std::string::npos) {
        p.origin = url;
        p.path = "/";
    } else {
        p.origin = url.substr(0, path_start);
        p.path = url.substr(path_start);
    }
    return p;
}

} // namespace

HttpLlmClient::HttpLlmClient(LlmClientSpec spec) : spec_(std::move(spec)) {
    if (spec_.endpoint.empty()) throw Error("llm endpoint not configured");
#ifndef DFTFORGE_WITH_TLS
    if (spec_.endpoint.rfind("https://", 0) == 0)
        throw Error("llm endpoint uses https but this build has no TLS support");
#endif
}

std::string HttpLlmClient::complete(const std::vector<ChatMessage>& messages) {
    ParsedUrl url = split_url(spec_.endpoint);

    json jmsgs = json::array();
    for (const auto& m : messages) jmsgs.push_back({{"role", m.role}, {"content", m.content}});
    const std::string body = json{{"model", spec_.model}, {"messages", jmsgs}}.dump();

    std::string token;
    if (!spec_.token_env.empty()) {
        const char* v = std::getenv(spec_.token_env.c_str());
        if (v) token = v;
    }

    std::string last_error;
    int backoff = spec_.backoff_initial_ms;
    for (int attempt = 0; attempt <= spec_.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
            backoff *= 2;
        }
        httplib::Client cli(url.origin);
        cli.set_connection_timeout(spec_.timeout_seconds, 0);
        cli.set_read_timeout(spec_.timeout_seconds, 0);
        httplib::Headers headers;
        if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);
        auto res = cli.Post(url.path, headers, body, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status < 200 || res->status >= 300) {
            last_error = "http status " + std::to_string(res->status);
            // 4xx other than 429 will not improve on retry
            if (res->status >= 400 && res->status < 500 && res->status != 429)
                throw Error("llm request failed: " + last_error);
            continue;
        }
        json j = json::parse(res->body, nullptr, false);
        if (j.is_discarded()) throw Error("llm response: malformed JSON body");
        try {
            return j.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const json::exception&) {
            throw Error("llm response: missing choices[0].message.content");
        }
    }
    throw Error("llm request failed after " + std::to_string(spec_.max_retries + 1) +
                " attempts: " + last_error);
}

MockLlmClient::MockLlmClient(std::string fixture_dir) : dir_(std::move(fixture_dir)) {}

std::string MockLlmClient::complete(const std::vector<ChatMessage>&) {
    ++call_count_;
    const std::string path = dir_ + "/response_" + std::to_string(call_count_) + ".md";
    if (!file_exists(path))
        throw Error("mock llm: no scripted response for call " + std::to_string(call_count_) +
                    " (" + path + ")");
    return read_file(path);
}

std::unique_ptr<LlmTransport> make_http_client(const LlmClientSpec& spec) {
    return std::make_unique<HttpLlmClient>(spec);
}

std::unique_ptr<LlmTransport> make_mock_client(const std::string& fixture_dir) {
    return std::make_unique<MockLlmClient>(fixture_dir);
}

} // namespace dftforge
