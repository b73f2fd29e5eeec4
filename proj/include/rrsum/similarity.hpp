#pragma once

#include "rrsum/labeler.hpp"
#include "rrsum/report.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rrsum {

struct IndexEntry {
    std::string report_id;
    LabelVector vector;
};

struct SearchConfig {
    int n_similar = 15;
    std::optional<std::size_t> subset_size;  // nullopt: scan the full index
    std::uint32_t seed = 0;
};

struct SearchHit {
    std::string report_id;
    double distance;
};

// Exact integer squared distance over the raw codes; used for ordering so
// ties never depend on floating-point rounding.
int squared_distance(const LabelVector& a, const LabelVector& b);

double euclidean_distance(const LabelVector& a, const LabelVector& b);

// Stride sampling: k = floor(n / subset_size), start = first mt19937 draw
// mod k; returns entries at start, start+k, ... truncated to subset_size.
// The mt19937 draw makes the result portable across standard libraries.
std::vector<IndexEntry> systematic_sample(std::span<const IndexEntry> entries,
                                          std::size_t subset_size,
                                          std::uint32_t seed);

// The n_similar entries closest to the query by Euclidean distance over the
// label codes, sorted ascending by (distance, insertion order). Entries whose
// id equals exclude_id are skipped so a report never retrieves itself.
std::vector<SearchHit> top_k_similar(const LabelVector& query,
                                     std::span<const IndexEntry> index,
                                     const SearchConfig& config,
                                     std::string_view exclude_id = {});

// Labels every report's findings with the given rules.
std::vector<IndexEntry> build_index(std::span<const RadiologyReport> corpus,
                                    const RuleSet& rules);

// TSV persistence: report_id followed by the 14 codes in letter order.
void save_labels(std::span<const IndexEntry> entries, const std::filesystem::path& path);
std::vector<IndexEntry> load_labels(const std::filesystem::path& path);

}  // namespace rrsum
