#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dftforge/util.hpp"

namespace dftforge {

struct ChatMessage {
    std::string role; // "system" | "user" | "assistant"
    std::string content;
};

// Chat-completion endpoint description. The auth token is named by the
// environment variable holding it and is never stored or logged.
struct LlmClientSpec {
    std::string endpoint;  // e.g. http://host:port/v1/chat/completions
    std::string model;
    std::string token_env; // name of the env var with the bearer token
    int timeout_seconds = 120;
    int max_retries = 3;
    int backoff_initial_ms = 500; // doubles per retry

    std::string to_json() const;
    static LlmClientSpec from_json(const std::string& text);
};

class LlmTransport {
public:
    virtual ~LlmTransport() = default;
    // Returns the assistant message content; throws Error after retries are
    // exhausted or on a malformed response.
    virtual std::string complete(const std::vector<ChatMessage>& messages) = 0;
};

// JSON chat-completion client ({model, messages:[{role, content}]}) with
// exponential-backoff retries. HTTPS requires a TLS-enabled build.
class HttpLlmClient : public LlmTransport {
public:
    explicit HttpLlmClient(LlmClientSpec spec);
    std::string complete(const std::vector<ChatMessage>& messages) override;

private:
    LlmClientSpec spec_;
};

// Scripted client for tests and offline runs: reads response_<n>.md from a
// fixture directory, advancing n on every call.
class MockLlmClient : public LlmTransport {
public:
    explicit MockLlmClient(std::string fixture_dir);
    std::string complete(const std::vector<ChatMessage>& messages) override;
    std::size_t calls() const { return call_count_; }

private:
    std::string dir_;
    std::size_t call_count_ = 0;
};

std::unique_ptr<LlmTransport> make_http_client(const LlmClientSpec& spec);
std::unique_ptr<LlmTransport> make_mock_client(const std::string& fixture_dir);

} // namespace dftforge
