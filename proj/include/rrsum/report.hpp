#pragma once

#include "rrsum/errors.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rrsum {

struct RadiologyReport {
    std::string id;
    std::string findings;
    std::string impression;

    bool operator==(const RadiologyReport&) const = default;
};

struct CorpusStats {
    int report_count = 0;
    double avg_words_findings = 0.0;
    double avg_words_impression = 0.0;
    double avg_sentences_findings = 0.0;
    double avg_sentences_impression = 0.0;
};

// Eligibility thresholds: reports with findings shorter than 10 words or
// impressions shorter than 2 words are removed.
inline constexpr int kMinFindingsWords = 10;
inline constexpr int kMinImpressionWords = 2;

enum class Section { Findings, Impression };

std::string_view section_name(Section s);

class MissingSectionError : public DataError {
public:
    MissingSectionError(Section section, const std::string& detail);
    Section section() const { return section_; }

private:
    Section section_;
};

// Extracts the text after a "FINDINGS" header up to the next header, and
// after an "IMPRESSION" header likewise. Header matching is
// case-insensitive, tolerates an optional colon, and the first occurrence
// of each header wins. Whitespace-only bodies count as missing.
RadiologyReport parse_report(std::string_view raw, std::string id);

// Keeps reports with findings >= 10 words and impression >= 2 words,
// preserving input order. Idempotent.
std::vector<RadiologyReport> filter_eligible(std::span<const RadiologyReport> reports);

bool is_eligible(const RadiologyReport& report);

// JSON-lines persistence: one object per line with string fields "id",
// "findings", "impression". Unknown fields are ignored on read and
// dropped on write. load/save round-trips are exact.
std::vector<RadiologyReport> load_corpus(const std::filesystem::path& path);
void save_corpus(std::span<const RadiologyReport> reports, const std::filesystem::path& path);

CorpusStats compute_stats(std::span<const RadiologyReport> reports);

}  // namespace rrsum
