#include "rrsum/backend.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <thread>

namespace rrsum {

using ordered_json = nlohmann::ordered_json;

namespace {

struct ParsedEndpoint {
    std::string host_url;  // scheme://host[:port]
    std::string base_path; // may be empty
};

ParsedEndpoint split_endpoint(const std::string& endpoint) {
    const auto scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigError("endpoint must start with http:// or https://: " + endpoint);
    }
    const auto path_start = endpoint.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {endpoint, ""};
    std::string base = endpoint.substr(path_start);
    while (!base.empty() && base.back() == '/') base.pop_back();
    return {endpoint.substr(0, path_start), base};
}

bool retryable_status(int status) {
    return status == 429 || status >= 500;
}

}  // namespace

HttpBackend::HttpBackend(BackendConfig config, std::string api_key)
    : config_(std::move(config)), api_key_(std::move(api_key)) {
    if (config_.max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");
    if (config_.max_retries < 0) throw ConfigError("max_retries must be >= 0");
}

void HttpBackend::acquire_slot() {
    std::unique_lock lock(mutex_);
    slot_free_.wait(lock, [&] { return in_flight_ < config_.max_in_flight; });
    ++in_flight_;
}

void HttpBackend::release_slot() {
    {
        std::lock_guard lock(mutex_);
        --in_flight_;
    }
    slot_free_.notify_one();
}

CompletionResult HttpBackend::complete(const Prompt& prompt) {
    validate_prompt(prompt);
    if (api_key_.empty()) {
        throw AuthError("no API key available; set LLM_API_KEY");
    }

    ordered_json body;
    body["model"] = config_.model;
    body["temperature"] = config_.temperature;
    body["max_tokens"] = config_.max_output_tokens;
    body["messages"] = ordered_json::array();
    for (const auto& message : prompt.messages) {
        ordered_json entry;
        entry["role"] = std::string(role_name(message.role));
        entry["content"] = message.content;
        body["messages"].push_back(std::move(entry));
    }
    const std::string payload = body.dump();

    const ParsedEndpoint endpoint = split_endpoint(config_.endpoint);
    const std::string path = endpoint.base_path + "/chat/completions";

    acquire_slot();
    struct SlotGuard {
        HttpBackend* backend;
        ~SlotGuard() { backend->release_slot(); }
    } guard{this};

    const auto started = std::chrono::steady_clock::now();
    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            // Exponential backoff: base * 2^(attempt-1).
            std::this_thread::sleep_for(config_.retry_backoff * (1 << (attempt - 1)));
        }

        httplib::Client client(endpoint.host_url);
        client.set_connection_timeout(config_.timeout);
        client.set_read_timeout(config_.timeout);
        client.set_write_timeout(config_.timeout);
        client.set_default_headers({{"Authorization", "Bearer " + api_key_}});

        auto res = client.Post(path, payload, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;  // timeouts and connection failures are transient
        }
        if (res->status == 401 || res->status == 403) {
            throw AuthError("authentication rejected (HTTP " + std::to_string(res->status) + ")");
        }
        if (retryable_status(res->status)) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) {
            throw BackendError("unexpected HTTP status " + std::to_string(res->status) + ": " +
                               res->body);
        }

        ordered_json doc;
        try {
            doc = ordered_json::parse(res->body);
        } catch (const ordered_json::parse_error& e) {
            throw MalformedResponseError(std::string("response is not JSON: ") + e.what());
        }

        CompletionResult result;
        try {
            result.text = doc.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const ordered_json::exception&) {
            throw MalformedResponseError("response lacks choices[0].message.content");
        }
        if (doc.contains("usage") && doc["usage"].is_object()) {
            result.prompt_tokens = doc["usage"].value("prompt_tokens", 0L);
            result.completion_tokens = doc["usage"].value("completion_tokens", 0L);
        }
        if (result.prompt_tokens == 0) result.prompt_tokens = estimate_tokens(prompt);
        if (result.completion_tokens == 0) {
            result.completion_tokens = (static_cast<long>(result.text.size()) + 3) / 4;
        }
        result.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::steady_clock::now() - started);
        return result;
    }

    if (last_error.rfind("HTTP 429", 0) == 0) {
        throw RateLimitedError("rate limited after " + std::to_string(config_.max_retries) +
                               " retries");
    }
    if (last_error.rfind("transport error", 0) == 0) {
        throw TimeoutError(last_error + " after " + std::to_string(config_.max_retries) +
                           " retries");
    }
    throw BackendError(last_error + " after " + std::to_string(config_.max_retries) + " retries");
}

std::string HttpBackend::name() const {
    return "http:" + config_.model;
}

}  // namespace rrsum
