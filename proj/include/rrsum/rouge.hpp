#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rrsum {

// Lowercased word tokens. Tokenization is a lowercase alphanumeric split
// with no stemming and no stopword removal, so scores are reproducible but
// not tuned for parity with the classic Perl toolkit.
using TokenSequence = std::vector<std::string>;

struct RougeScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

TokenSequence rouge_tokenize(std::string_view text);

// Clipped n-gram overlap, n in {1,2}. Empty n-gram sets on either side
// score zero.
RougeScore rouge_n(const TokenSequence& candidate, const TokenSequence& reference, int n);

// Longest common subsequence F1.
RougeScore rouge_l(const TokenSequence& candidate, const TokenSequence& reference);

int lcs_length(const TokenSequence& a, const TokenSequence& b);

// Mean Rouge-1 F1 of the candidate against every reference; the evaluation
// signal of the optimization loop. Throws DataError on an empty reference
// list.
double mean_rouge1_against(std::string_view candidate, std::span<const std::string> references);

}  // namespace rrsum
