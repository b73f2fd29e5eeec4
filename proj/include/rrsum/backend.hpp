#pragma once

#include "rrsum/errors.hpp"
#include "rrsum/prompt.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

namespace rrsum {

struct BackendConfig {
    std::string endpoint = "https://api.openai.com/v1";
    std::string model = "gpt-3.5-turbo";
    double temperature = 0.0;
    int max_output_tokens = 256;
    std::chrono::milliseconds timeout{30000};
    int max_retries = 3;
    std::chrono::milliseconds retry_backoff{500};
    int max_in_flight = 4;
    double price_per_1k_prompt = 0.001;
    double price_per_1k_completion = 0.002;
};

struct CompletionResult {
    std::string text;
    long prompt_tokens = 0;      // as reported by the API, or estimated
    long completion_tokens = 0;
    std::chrono::milliseconds latency{0};
};

class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual CompletionResult complete(const Prompt& prompt) = 0;
    virtual std::string name() const = 0;
};

struct MockScript {
    enum class Mode { Scripted, NearestEcho, Template };

    Mode mode = Mode::NearestEcho;
    std::vector<std::string> responses;  // Scripted; non-empty
    std::string text;                    // Template

    static MockScript scripted(std::vector<std::string> responses);
    static MockScript nearest_echo();
    static MockScript fixed(std::string text);

    // {"mode":"scripted","responses":[...]} | {"mode":"nearest_echo"} |
    // {"mode":"template","text":"..."}
    static MockScript load(const std::filesystem::path& path);
};

// Deterministic offline backend; never fails.
//   Scripted    — returns the scripted responses in call order, repeating the
//                 last entry once the script is exhausted.
//   NearestEcho — returns the content of the first Assistant message, i.e.
//                 the impression of the top-1 similar exemplar embedded in
//                 the prompt.
//   Template    — always returns the fixed text.
class MockBackend : public ChatBackend {
public:
    explicit MockBackend(MockScript script);

    CompletionResult complete(const Prompt& prompt) override;
    std::string name() const override;

    std::size_t call_count() const { return calls_.load(); }

private:
    MockScript script_;
    std::atomic<std::size_t> calls_{0};
};

// OpenAI-compatible chat-completions client. POSTs
// {endpoint}/chat/completions with {model, temperature, max_tokens,
// messages:[{role, content}]} and reads choices[0].message.content plus
// usage token counts. Transient failures (429, 5xx, timeouts) are retried
// with exponential backoff up to max_retries; 401/403 raise AuthError and
// are never retried. Concurrent complete() calls are capped at
// max_in_flight.
class HttpBackend : public ChatBackend {
public:
    HttpBackend(BackendConfig config, std::string api_key);

    CompletionResult complete(const Prompt& prompt) override;
    std::string name() const override;

private:
    void acquire_slot();
    void release_slot();

    BackendConfig config_;
    std::string api_key_;
    std::mutex mutex_;
    std::condition_variable slot_free_;
    int in_flight_ = 0;
};

// Sum of prompt_tokens/1000 * prompt price + completion_tokens/1000 *
// completion price over all results.
double estimate_cost(std::span<const CompletionResult> results,
                     double price_per_1k_prompt,
                     double price_per_1k_completion);

// spec: "http" or "mock:FILE" or the builtin shorthands "mock:nearest_echo"
// and "mock:template:<text>". The http backend reads LLM_API_KEY from the
// environment.
std::unique_ptr<ChatBackend> make_backend(const std::string& spec, const BackendConfig& config);

}  // namespace rrsum
