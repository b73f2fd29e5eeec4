#include "rrsum/similarity.hpp"

#include "rrsum/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace rrsum {

int squared_distance(const LabelVector& a, const LabelVector& b) {
    int sum = 0;
    for (std::size_t i = 0; i < kObservationCount; ++i) {
        const int d = code_value(a[i]) - code_value(b[i]);
        sum += d * d;
    }
    return sum;
}

double euclidean_distance(const LabelVector& a, const LabelVector& b) {
    return std::sqrt(static_cast<double>(squared_distance(a, b)));
}

std::vector<IndexEntry> systematic_sample(std::span<const IndexEntry> entries,
                                          std::size_t subset_size,
                                          std::uint32_t seed) {
    if (subset_size == 0) throw ConfigError("subset size must be positive");
    if (subset_size > entries.size()) {
        throw DataError("subset size " + std::to_string(subset_size) + " exceeds index size " +
                        std::to_string(entries.size()));
    }
    const std::size_t stride = entries.size() / subset_size;
    const std::size_t start = static_cast<std::size_t>(std::mt19937(seed)()) % stride;

    std::vector<IndexEntry> sample;
    sample.reserve(subset_size);
    for (std::size_t i = start; i < entries.size() && sample.size() < subset_size; i += stride) {
        sample.push_back(entries[i]);
    }
    return sample;
}

std::vector<SearchHit> top_k_similar(const LabelVector& query,
                                     std::span<const IndexEntry> index,
                                     const SearchConfig& config,
                                     std::string_view exclude_id) {
    if (config.n_similar < 1) throw ConfigError("n_similar must be >= 1");

    std::vector<IndexEntry> sampled;
    std::span<const IndexEntry> scan = index;
    if (config.subset_size) {
        sampled = systematic_sample(index, *config.subset_size, config.seed);
        scan = sampled;
    }

    struct Candidate {
        int squared;
        std::size_t position;  // insertion order, the tie-break
    };
    std::vector<Candidate> candidates;
    candidates.reserve(scan.size());
    for (std::size_t i = 0; i < scan.size(); ++i) {
        if (!exclude_id.empty() && scan[i].report_id == exclude_id) continue;
        candidates.push_back({squared_distance(query, scan[i].vector), i});
    }

    const auto k = static_cast<std::size_t>(config.n_similar);
    if (candidates.size() < k) {
        throw DataError("index has " + std::to_string(candidates.size()) +
                        " usable entries, need " + std::to_string(k));
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        return a.squared != b.squared ? a.squared < b.squared : a.position < b.position;
    });

    std::vector<SearchHit> hits;
    hits.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        const auto& entry = scan[candidates[i].position];
        hits.push_back({entry.report_id, std::sqrt(static_cast<double>(candidates[i].squared))});
    }
    return hits;
}

std::vector<IndexEntry> build_index(std::span<const RadiologyReport> corpus,
                                    const RuleSet& rules) {
    std::vector<IndexEntry> entries;
    entries.reserve(corpus.size());
    for (const auto& report : corpus) {
        entries.push_back({report.id, label_report(report.findings, rules)});
    }
    return entries;
}

void save_labels(std::span<const IndexEntry> entries, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write label file: " + path.string());
    for (const auto& entry : entries) {
        out << entry.report_id;
        for (const auto code : entry.vector) out << '\t' << code_value(code);
        out << '\n';
    }
    if (!out) throw DataError("write failed: " + path.string());
}

std::vector<IndexEntry> load_labels(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open label file: " + path.string());

    std::vector<IndexEntry> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        std::vector<std::string> fields;
        std::istringstream stream(line);
        std::string field;
        while (std::getline(stream, field, '\t')) fields.push_back(field);

        if (fields.size() != kObservationCount + 1 || fields[0].empty()) {
            throw DataError(path.string() + ":" + std::to_string(line_no) +
                            ": expected report_id followed by 14 codes");
        }
        IndexEntry entry;
        entry.report_id = fields[0];
        for (std::size_t i = 0; i < kObservationCount; ++i) {
            const std::string& cell = fields[i + 1];
            std::size_t consumed = 0;
            int value = 0;
            try {
                value = std::stoi(cell, &consumed);
            } catch (const std::exception&) {
                consumed = 0;
            }
            if (consumed != cell.size() || cell.empty()) {
                throw DataError(path.string() + ":" + std::to_string(line_no) +
                                ": invalid label code '" + cell + "'");
            }
            entry.vector[i] = code_from_value(value);
        }
        entries.push_back(std::move(entry));
    }
    return entries;
}

}  // namespace rrsum
