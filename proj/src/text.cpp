#include "rrsum/text.hpp"

namespace rrsum::text {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_alnum(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

namespace {

char lower_char(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

bool is_terminator(char c) {
    return c == '.' || c == '!' || c == '?';
}

}  // namespace

std::string to_lower(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) out.push_back(lower_char(c));
    return out;
}

std::string_view trim(std::string_view s) {
    std::size_t begin = 0;
    std::size_t end = s.size();
    while (begin < end && is_space(s[begin])) ++begin;
    while (end > begin && is_space(s[end - 1])) --end;
    return s.substr(begin, end - begin);
}

int word_count(std::string_view s) {
    int count = 0;
    bool in_word = false;
    for (char c : s) {
        if (is_space(c)) {
            in_word = false;
        } else if (!in_word) {
            in_word = true;
            ++count;
        }
    }
    return count;
}

int sentence_count(std::string_view s) {
    int count = 0;
    bool has_content = false;
    for (char c : s) {
        if (is_terminator(c)) {
            if (has_content) {
                ++count;
                has_content = false;
            }
        } else if (!is_space(c)) {
            has_content = true;
        }
    }
    if (has_content) ++count;
    return count;
}

std::vector<std::string> split_sentences(std::string_view s) {
    std::vector<std::string> sentences;
    std::string current;
    bool has_content = false;
    for (char c : s) {
        current.push_back(c);
        if (is_terminator(c)) {
            if (has_content) {
                sentences.emplace_back(trim(current));
                has_content = false;
            }
            current.clear();
        } else if (!is_space(c)) {
            has_content = true;
        }
    }
    if (has_content) sentences.emplace_back(trim(current));
    return sentences;
}

std::vector<std::string> tokenize(std::string_view s) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : s) {
        if (is_alnum(c)) {
            current.push_back(lower_char(c));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

}  // namespace rrsum::text
