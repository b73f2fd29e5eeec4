#include "rrsum/backend.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>

namespace rrsum {

MockScript MockScript::scripted(std::vector<std::string> responses) {
    if (responses.empty()) throw ConfigError("scripted mock needs at least one response");
    MockScript script;
    script.mode = Mode::Scripted;
    script.responses = std::move(responses);
    return script;
}

MockScript MockScript::nearest_echo() {
    MockScript script;
    script.mode = Mode::NearestEcho;
    return script;
}

MockScript MockScript::fixed(std::string text) {
    if (text.empty()) throw ConfigError("template mock needs a non-empty text");
    MockScript script;
    script.mode = Mode::Template;
    script.text = std::move(text);
    return script;
}

MockScript MockScript::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open mock script: " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path.string() + ": malformed mock script: " + e.what());
    }

    const auto mode = doc.at("mode").get<std::string>();
    if (mode == "scripted") {
        return scripted(doc.at("responses").get<std::vector<std::string>>());
    }
    if (mode == "nearest_echo") return nearest_echo();
    if (mode == "template") return fixed(doc.at("text").get<std::string>());
    throw ConfigError(path.string() + ": unknown mock mode '" + mode + "'");
}

MockBackend::MockBackend(MockScript script) : script_(std::move(script)) {
    if (script_.mode == MockScript::Mode::Scripted && script_.responses.empty()) {
        throw ConfigError("scripted mock needs at least one response");
    }
}

CompletionResult MockBackend::complete(const Prompt& prompt) {
    const std::size_t call = calls_.fetch_add(1);

    std::string response;
    switch (script_.mode) {
        case MockScript::Mode::Scripted: {
            // A short script drives a long run by repeating its last entry.
            const std::size_t i = std::min(call, script_.responses.size() - 1);
            response = script_.responses[i];
            break;
        }
        case MockScript::Mode::NearestEcho: {
            // The first assistant message is the top-1 exemplar's impression.
            response = "no prior example available";
            for (const auto& message : prompt.messages) {
                if (message.role == Role::Assistant) {
                    response = message.content;
                    break;
                }
            }
            break;
        }
        case MockScript::Mode::Template:
            response = script_.text;
            break;
    }

    CompletionResult result;
    result.text = std::move(response);
    result.prompt_tokens = estimate_tokens(prompt);
    result.completion_tokens = (static_cast<long>(result.text.size()) + 3) / 4;
    result.latency = std::chrono::milliseconds(0);
    return result;
}

std::string MockBackend::name() const {
    switch (script_.mode) {
        case MockScript::Mode::Scripted: return "mock:scripted";
        case MockScript::Mode::NearestEcho: return "mock:nearest_echo";
        case MockScript::Mode::Template: return "mock:template";
    }
    return "mock";
}

double estimate_cost(std::span<const CompletionResult> results,
                     double price_per_1k_prompt,
                     double price_per_1k_completion) {
    double total = 0.0;
    for (const auto& result : results) {
        total += static_cast<double>(result.prompt_tokens) / 1000.0 * price_per_1k_prompt;
        total += static_cast<double>(result.completion_tokens) / 1000.0 * price_per_1k_completion;
    }
    return total;
}

std::unique_ptr<ChatBackend> make_backend(const std::string& spec, const BackendConfig& config) {
    if (spec == "http") {
        const char* key = std::getenv("LLM_API_KEY");
        return std::make_unique<HttpBackend>(config, key ? key : "");
    }
    if (spec.rfind("mock:", 0) == 0) {
        const std::string arg = spec.substr(5);
        if (arg == "nearest_echo") return std::make_unique<MockBackend>(MockScript::nearest_echo());
        if (arg.rfind("template:", 0) == 0) {
            return std::make_unique<MockBackend>(MockScript::fixed(arg.substr(9)));
        }
        return std::make_unique<MockBackend>(MockScript::load(arg));
    }
    throw ConfigError("unknown backend spec '" + spec + "' (use http or mock:...)");
}

}  // namespace rrsum
