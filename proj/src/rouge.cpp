#include "rrsum/rouge.hpp"

#include "rrsum/errors.hpp"
#include "rrsum/text.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <unordered_map>

namespace rrsum {

TokenSequence rouge_tokenize(std::string_view text) {
    return text::tokenize(text);
}

namespace {

double f1_from(double precision, double recall) {
    const double sum = precision + recall;
    return sum > 0.0 ? 2.0 * precision * recall / sum : 0.0;
}

// Word tokens rarely share a first character when they differ; checking it
// before memcmp keeps the LCS inner loop out of the library call.
inline bool tokens_equal(const std::string& x, const std::string& y) {
    const std::size_t size = x.size();
    if (size != y.size()) return false;
    if (size == 0) return true;
    const char* xd = x.data();
    const char* yd = y.data();
    if (xd[0] != yd[0]) return false;
    return size == 1 || std::memcmp(xd + 1, yd + 1, size - 1) == 0;
}

// n-gram multiset as joined keys; '\x1f' cannot appear in tokens.
std::unordered_map<std::string, int> ngram_counts(const TokenSequence& tokens, int n) {
    std::unordered_map<std::string, int> counts;
    if (static_cast<int>(tokens.size()) < n) return counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        std::string key = tokens[i];
        for (int j = 1; j < n; ++j) {
            key.push_back('\x1f');
            key.append(tokens[i + j]);
        }
        ++counts[key];
    }
    return counts;
}

}  // namespace

RougeScore rouge_n(const TokenSequence& candidate, const TokenSequence& reference, int n) {
    if (n != 1 && n != 2) throw std::invalid_argument("rouge_n supports n in {1,2}");

    const auto cand_counts = ngram_counts(candidate, n);
    const auto ref_counts = ngram_counts(reference, n);
    const long cand_total = static_cast<long>(candidate.size()) - n + 1;
    const long ref_total = static_cast<long>(reference.size()) - n + 1;
    if (cand_total <= 0 || ref_total <= 0) return {};

    long overlap = 0;  // clipped counts
    for (const auto& [gram, count] : cand_counts) {
        const auto it = ref_counts.find(gram);
        if (it != ref_counts.end()) overlap += std::min(count, it->second);
    }

    RougeScore score;
    score.precision = static_cast<double>(overlap) / static_cast<double>(cand_total);
    score.recall = static_cast<double>(overlap) / static_cast<double>(ref_total);
    score.f1 = f1_from(score.precision, score.recall);
    return score;
}

int lcs_length(const TokenSequence& a, const TokenSequence& b) {
    // Common prefixes and suffixes always join the LCS; only the middle
    // needs the quadratic work.
    std::size_t begin = 0;
    std::size_t a_end = a.size(), b_end = b.size();
    while (begin < a_end && begin < b_end && tokens_equal(a[begin], b[begin])) ++begin;
    while (a_end > begin && b_end > begin && tokens_equal(a[a_end - 1], b[b_end - 1])) {
        --a_end;
        --b_end;
    }
    const int affixes = static_cast<int>(begin + (a.size() - a_end));
    const std::size_t m = a_end - begin;
    const std::size_t n = b_end - begin;
    if (m == 0 || n == 0) return affixes;

    const std::string* a_mid = a.data() + begin;
    const std::string* b_mid = b.data() + begin;

    // Bit-parallel LCS (Crochemore/Iliopoulos/Pinzon/Reid): the DP row lives
    // in one word, so each a-token costs a handful of word operations.
    if (n <= 63) {
        struct TokenMask {
            const std::string* token;
            std::uint64_t mask;
        };
        TokenMask masks[63];
        std::size_t distinct = 0;
        for (std::size_t j = 0; j < n; ++j) {
            std::size_t d = 0;
            while (d < distinct && !tokens_equal(*masks[d].token, b_mid[j])) ++d;
            if (d == distinct) masks[distinct++] = {&b_mid[j], 0};
            masks[d].mask |= std::uint64_t{1} << j;
        }

        std::uint64_t row = 0;
        for (std::size_t i = 0; i < m; ++i) {
            std::uint64_t match = 0;
            for (std::size_t d = 0; d < distinct; ++d) {
                if (tokens_equal(*masks[d].token, a_mid[i])) {
                    match = masks[d].mask;
                    break;
                }
            }
            const std::uint64_t t = row | match;
            row = t & ~(t - ((row << 1) | 1));
        }
        return affixes + std::popcount(row);
    }

    // Long rows fall back to the classic rolling-row DP.
    std::vector<int> rows(2 * (n + 1), 0);
    int* prev = rows.data();
    int* curr = prev + n + 1;
    for (std::size_t i = 1; i <= m; ++i) {
        const std::string& ai = a_mid[i - 1];
        int diag = 0;  // prev[j-1]
        int left = 0;  // curr[j-1]
        for (std::size_t j = 1; j <= n; ++j) {
            const int up = prev[j];
            const int value = tokens_equal(ai, b_mid[j - 1]) ? diag + 1 : (up > left ? up : left);
            curr[j] = value;
            left = value;
            diag = up;
        }
        std::swap(prev, curr);
    }
    return affixes + prev[n];
}

RougeScore rouge_l(const TokenSequence& candidate, const TokenSequence& reference) {
    if (candidate.empty() || reference.empty()) return {};
    const int lcs = lcs_length(candidate, reference);

    RougeScore score;
    score.precision = static_cast<double>(lcs) / static_cast<double>(candidate.size());
    score.recall = static_cast<double>(lcs) / static_cast<double>(reference.size());
    score.f1 = f1_from(score.precision, score.recall);
    return score;
}

double mean_rouge1_against(std::string_view candidate, std::span<const std::string> references) {
    if (references.empty()) throw DataError("mean Rouge-1 needs at least one reference");

    const TokenSequence cand_tokens = rouge_tokenize(candidate);
    double sum = 0.0;
    for (const auto& reference : references) {
        sum += rouge_n(cand_tokens, rouge_tokenize(reference), 1).f1;
    }
    return sum / static_cast<double>(references.size());
}

}  // namespace rrsum
