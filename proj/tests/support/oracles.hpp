#pragma once

// Independent test oracles. These deliberately re-derive results along a
// different route than the library so the two sides can disagree.

#include "rrsum/labeler.hpp"
#include "rrsum/rouge.hpp"
#include "rrsum/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace testsupport {

// Brute-force nearest neighbours: compute every distance, stable-sort the
// whole list by (squared distance, position), take the first k.
inline std::vector<rrsum::SearchHit> brute_force_top_k(
    const rrsum::LabelVector& query, const std::vector<rrsum::IndexEntry>& index, int k,
    std::string_view exclude_id = {}) {
    struct Row {
        int squared;
        std::size_t position;
    };
    std::vector<Row> rows;
    for (std::size_t i = 0; i < index.size(); ++i) {
        if (!exclude_id.empty() && index[i].report_id == exclude_id) continue;
        int squared = 0;
        for (std::size_t d = 0; d < rrsum::kObservationCount; ++d) {
            const int diff =
                rrsum::code_value(query[d]) - rrsum::code_value(index[i].vector[d]);
            squared += diff * diff;
        }
        rows.push_back({squared, i});
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.squared < b.squared; });
    std::vector<rrsum::SearchHit> hits;
    for (int i = 0; i < k && i < static_cast<int>(rows.size()); ++i) {
        hits.push_back({index[rows[i].position].report_id,
                        std::sqrt(static_cast<double>(rows[i].squared))});
    }
    return hits;
}

// Exhaustive-subsequence LCS: enumerate every subsequence of `a` (bitmask)
// and keep the longest that is also a subsequence of `b`.
inline int exhaustive_lcs(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    const auto is_subsequence = [](const std::vector<std::string>& needle,
                                   const std::vector<std::string>& haystack) {
        std::size_t i = 0;
        for (const auto& token : haystack) {
            if (i < needle.size() && needle[i] == token) ++i;
        }
        return i == needle.size();
    };

    int best = 0;
    const auto n = a.size();
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        std::vector<std::string> sub;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (1u << i)) sub.push_back(a[i]);
        }
        if (static_cast<int>(sub.size()) > best && is_subsequence(sub, b)) {
            best = static_cast<int>(sub.size());
        }
    }
    return best;
}

inline rrsum::LabelVector random_label_vector(std::mt19937& rng) {
    static const rrsum::LabelCode codes[] = {rrsum::LabelCode::Uncertain, rrsum::LabelCode::Absent,
                                             rrsum::LabelCode::Present,
                                             rrsum::LabelCode::Unmentioned};
    rrsum::LabelVector vector;
    for (auto& code : vector) code = codes[rng() % 4];
    return vector;
}

inline std::vector<std::string> random_tokens(std::mt19937& rng, std::size_t max_len,
                                              const std::vector<std::string>& alphabet) {
    std::vector<std::string> tokens(rng() % (max_len + 1));
    for (auto& token : tokens) token = alphabet[rng() % alphabet.size()];
    return tokens;
}

}  // namespace testsupport
