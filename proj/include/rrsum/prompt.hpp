#pragma once

#include "rrsum/errors.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rrsum {

enum class Role { System, User, Assistant };

std::string_view role_name(Role role);          // "system" | "user" | "assistant"
Role role_from_name(std::string_view name);

struct ChatMessage {
    Role role;
    std::string content;  // never empty in a valid prompt

    bool operator==(const ChatMessage&) const = default;
};

struct Prompt {
    std::vector<ChatMessage> messages;

    bool operator==(const Prompt&) const = default;
};

// A valid prompt starts with a System message, ends with a User message
// (the final query), and has no empty contents. Throws ConfigError.
void validate_prompt(const Prompt& prompt);

struct ExemplarReport {
    std::string findings;
    std::string impression;
};

enum class Polarity { Good, Bad };

std::string_view polarity_name(Polarity p);  // "good" | "bad"

struct FeedbackExemplar {
    std::string response;
    Polarity polarity;
    double score;  // mean Rouge-1 of the response against the exemplar impressions
};

struct PromptTemplateConfig {
    std::string task_description =
        "You are a chest radiologist. Summarize the FINDINGS of a chest "
        "radiology report into a concise IMPRESSION.";
    // Must contain exactly one {findings} placeholder.
    std::string question_template =
        "Summarize the following FINDINGS into an IMPRESSION.\nFINDINGS: {findings}";
    std::string good_preamble = "Below is an excellent impression of the FINDINGS above";
    std::string bad_preamble = "Below is a negative impression of the FINDINGS above";
    std::string optimization_rules =
        "Regenerate the impression so it is consistent with the excellent "
        "impression and avoids the negative impression.";
    std::string length_limit_sentence = "Keep the impression under {max_words} words.";
    int max_words = 60;

    bool operator==(const PromptTemplateConfig&) const = default;
};

// JSON file mirroring the PromptTemplateConfig fields; absent fields keep
// their defaults, unknown fields are an error.
PromptTemplateConfig load_template_config(const std::filesystem::path& path);

// [System: task description] ++ per exemplar, in similarity order,
// [User: question(findings), Assistant: impression] ++ [User: question(test
// findings)]. Message count is 2*|exemplars| + 2.
Prompt build_dynamic_prompt(std::string_view test_findings,
                            std::span<const ExemplarReport> exemplars,
                            const PromptTemplateConfig& config);

// Inserts feedback pairs before the final query: bad exemplars oldest first,
// then good exemplars, each as [User: preamble, Assistant: response]. The
// final query becomes optimization rules + length limit + the original
// question. Oldest bad pairs are dropped until the token estimate fits the
// budget; good pairs are never dropped. Throws ConfigError when the prompt
// cannot fit even with every bad pair removed.
Prompt build_iterative_prompt(const Prompt& dynamic_prompt,
                              std::span<const FeedbackExemplar> goods,
                              std::span<const FeedbackExemplar> bads,
                              const PromptTemplateConfig& config,
                              int token_budget);

// ceil(bytes/4) per message content plus 4 per message overhead.
int estimate_tokens(const ChatMessage& message);
int estimate_tokens(const Prompt& prompt);

// Prompt dump format: JSON lines of {"role": ..., "content": ...}.
void write_prompt_jsonl(const Prompt& prompt, std::ostream& out);
void write_prompt_jsonl(const Prompt& prompt, const std::filesystem::path& path);
Prompt read_prompt_jsonl(const std::filesystem::path& path);

}  // namespace rrsum
