#include "rrsum/prompt.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

namespace rrsum {

using ordered_json = nlohmann::ordered_json;

std::string_view role_name(Role role) {
    switch (role) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
    }
    return "user";
}

Role role_from_name(std::string_view name) {
    if (name == "system") return Role::System;
    if (name == "user") return Role::User;
    if (name == "assistant") return Role::Assistant;
    throw DataError("unknown chat role: " + std::string(name));
}

std::string_view polarity_name(Polarity p) {
    return p == Polarity::Good ? "good" : "bad";
}

void validate_prompt(const Prompt& prompt) {
    if (prompt.messages.empty()) throw ConfigError("prompt has no messages");
    if (prompt.messages.front().role != Role::System) {
        throw ConfigError("prompt must start with a system message");
    }
    if (prompt.messages.back().role != Role::User) {
        throw ConfigError("prompt must end with a user message");
    }
    for (const auto& message : prompt.messages) {
        if (message.content.empty()) throw ConfigError("prompt contains an empty message");
    }
}

namespace {

constexpr std::string_view kFindingsPlaceholder = "{findings}";
constexpr std::string_view kMaxWordsPlaceholder = "{max_words}";

std::size_t count_occurrences(std::string_view text, std::string_view needle) {
    std::size_t count = 0, pos = 0;
    while ((pos = text.find(needle, pos)) != std::string_view::npos) {
        ++count;
        pos += needle.size();
    }
    return count;
}

std::string replace_placeholder(std::string_view tmpl, std::string_view placeholder,
                                std::string_view value) {
    std::string out(tmpl);
    const std::size_t pos = out.find(placeholder);
    if (pos != std::string::npos) out.replace(pos, placeholder.size(), value);
    return out;
}

std::string render_question(const PromptTemplateConfig& config, std::string_view findings) {
    if (count_occurrences(config.question_template, kFindingsPlaceholder) != 1) {
        throw ConfigError("question_template must contain exactly one {findings} placeholder");
    }
    return replace_placeholder(config.question_template, kFindingsPlaceholder, findings);
}

std::string render_length_limit(const PromptTemplateConfig& config) {
    return replace_placeholder(config.length_limit_sentence, kMaxWordsPlaceholder,
                               std::to_string(config.max_words));
}

}  // namespace

Prompt build_dynamic_prompt(std::string_view test_findings,
                            std::span<const ExemplarReport> exemplars,
                            const PromptTemplateConfig& config) {
    if (exemplars.empty()) throw ConfigError("dynamic prompt needs at least one exemplar");

    Prompt prompt;
    prompt.messages.reserve(2 * exemplars.size() + 2);
    prompt.messages.push_back({Role::System, config.task_description});
    for (const auto& exemplar : exemplars) {
        prompt.messages.push_back({Role::User, render_question(config, exemplar.findings)});
        prompt.messages.push_back({Role::Assistant, exemplar.impression});
    }
    prompt.messages.push_back({Role::User, render_question(config, test_findings)});
    validate_prompt(prompt);
    return prompt;
}

Prompt build_iterative_prompt(const Prompt& dynamic_prompt,
                              std::span<const FeedbackExemplar> goods,
                              std::span<const FeedbackExemplar> bads,
                              const PromptTemplateConfig& config,
                              int token_budget) {
    validate_prompt(dynamic_prompt);
    if (goods.empty() && bads.empty()) {
        throw ConfigError("iterative prompt needs at least one feedback exemplar");
    }

    // Final query: optimization rules, length limit, then the original
    // question (which already carries the test findings).
    std::string final_query = config.optimization_rules;
    final_query += '\n';
    final_query += render_length_limit(config);
    final_query += '\n';
    final_query += dynamic_prompt.messages.back().content;

    const auto assemble = [&](std::size_t first_bad) {
        Prompt prompt;
        prompt.messages.assign(dynamic_prompt.messages.begin(),
                               dynamic_prompt.messages.end() - 1);
        for (std::size_t i = first_bad; i < bads.size(); ++i) {
            prompt.messages.push_back({Role::User, config.bad_preamble});
            prompt.messages.push_back({Role::Assistant, bads[i].response});
        }
        for (const auto& good : goods) {
            prompt.messages.push_back({Role::User, config.good_preamble});
            prompt.messages.push_back({Role::Assistant, good.response});
        }
        prompt.messages.push_back({Role::User, final_query});
        return prompt;
    };

    // Evict oldest bad pairs until the estimate fits; good pairs stay.
    for (std::size_t first_bad = 0; first_bad <= bads.size(); ++first_bad) {
        Prompt prompt = assemble(first_bad);
        if (estimate_tokens(prompt) <= token_budget) {
            validate_prompt(prompt);
            return prompt;
        }
    }
    throw ConfigError("token budget " + std::to_string(token_budget) +
                      " too small for the iterative prompt");
}

int estimate_tokens(const ChatMessage& message) {
    const auto bytes = static_cast<int>(message.content.size());
    return (bytes + 3) / 4 + 4;
}

int estimate_tokens(const Prompt& prompt) {
    int total = 0;
    for (const auto& message : prompt.messages) total += estimate_tokens(message);
    return total;
}

void write_prompt_jsonl(const Prompt& prompt, std::ostream& out) {
    for (const auto& message : prompt.messages) {
        ordered_json line;
        line["role"] = std::string(role_name(message.role));
        line["content"] = message.content;
        out << line.dump() << '\n';
    }
}

void write_prompt_jsonl(const Prompt& prompt, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write prompt dump: " + path.string());
    write_prompt_jsonl(prompt, out);
}

Prompt read_prompt_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open prompt dump: " + path.string());

    Prompt prompt;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        ordered_json record;
        try {
            record = ordered_json::parse(line);
        } catch (const ordered_json::parse_error& e) {
            throw DataError(path.string() + ":" + std::to_string(line_no) +
                            ": malformed prompt line: " + e.what());
        }
        prompt.messages.push_back({role_from_name(record.at("role").get<std::string>()),
                                   record.at("content").get<std::string>()});
    }
    return prompt;
}

PromptTemplateConfig load_template_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open template file: " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path.string() + ": malformed template file: " + e.what());
    }

    PromptTemplateConfig config;
    for (const auto& [key, value] : doc.items()) {
        if (key == "task_description") config.task_description = value.get<std::string>();
        else if (key == "question_template") config.question_template = value.get<std::string>();
        else if (key == "good_preamble") config.good_preamble = value.get<std::string>();
        else if (key == "bad_preamble") config.bad_preamble = value.get<std::string>();
        else if (key == "optimization_rules") config.optimization_rules = value.get<std::string>();
        else if (key == "length_limit_sentence") {
            config.length_limit_sentence = value.get<std::string>();
        } else if (key == "max_words") {
            config.max_words = value.get<int>();
        } else {
            throw ConfigError(path.string() + ": unknown template field '" + key + "'");
        }
    }
    if (count_occurrences(config.question_template, kFindingsPlaceholder) != 1) {
        throw ConfigError(path.string() +
                          ": question_template must contain exactly one {findings} placeholder");
    }
    return config;
}

}  // namespace rrsum
