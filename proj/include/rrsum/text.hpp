#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace rrsum::text {

// Byte-level ASCII classification, independent of the C locale.
bool is_space(char c);
bool is_alnum(char c);

std::string to_lower(std::string_view s);

// Strips leading/trailing ASCII whitespace.
std::string_view trim(std::string_view s);

// A word is a maximal run of non-whitespace characters.
int word_count(std::string_view s);

// A sentence is a segment with at least one non-terminator, non-space
// character, terminated by '.', '!' or '?'. A trailing unterminated
// segment counts as one sentence.
int sentence_count(std::string_view s);

// Same segmentation as sentence_count; segments are trimmed and keep
// their original casing and punctuation.
std::vector<std::string> split_sentences(std::string_view s);

// Lowercased maximal runs of ASCII alphanumerics; everything else is a
// delimiter. Empty tokens never appear.
std::vector<std::string> tokenize(std::string_view s);

}  // namespace rrsum::text
