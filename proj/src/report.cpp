#include "rrsum/report.hpp"

#include "rrsum/text.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <optional>
#include <unordered_set>

namespace rrsum {

using ordered_json = nlohmann::ordered_json;

std::string_view section_name(Section s) {
    return s == Section::Findings ? "findings" : "impression";
}

MissingSectionError::MissingSectionError(Section section, const std::string& detail)
    : DataError("missing " + std::string(section_name(section)) + " section" +
                (detail.empty() ? "" : ": " + detail)),
      section_(section) {}

namespace {

bool is_word_char(char c) {
    return text::is_alnum(c);
}

// First case-insensitive occurrence of `header` bounded by non-word
// characters; npos when absent.
std::size_t find_header(std::string_view lowered, std::string_view header) {
    std::size_t pos = 0;
    while ((pos = lowered.find(header, pos)) != std::string_view::npos) {
        const bool left_ok = pos == 0 || !is_word_char(lowered[pos - 1]);
        const std::size_t end = pos + header.size();
        const bool right_ok = end >= lowered.size() || !is_word_char(lowered[end]);
        if (left_ok && right_ok) return pos;
        ++pos;
    }
    return std::string_view::npos;
}

// Skips whitespace and one optional colon after the header token.
std::size_t skip_header_suffix(std::string_view raw, std::size_t pos) {
    while (pos < raw.size() && text::is_space(raw[pos])) ++pos;
    if (pos < raw.size() && raw[pos] == ':') ++pos;
    return pos;
}

}  // namespace

RadiologyReport parse_report(std::string_view raw, std::string id) {
    const std::string lowered = text::to_lower(raw);
    const std::size_t findings_pos = find_header(lowered, "findings");
    const std::size_t impression_pos = find_header(lowered, "impression");

    if (findings_pos == std::string_view::npos) {
        throw MissingSectionError(Section::Findings, "report " + id);
    }
    if (impression_pos == std::string_view::npos) {
        throw MissingSectionError(Section::Impression, "report " + id);
    }

    auto section_body = [&](std::size_t header_pos, std::size_t header_len,
                            std::size_t other_pos) -> std::string_view {
        const std::size_t begin = skip_header_suffix(raw, header_pos + header_len);
        const std::size_t end =
            (other_pos != std::string_view::npos && other_pos > begin) ? other_pos : raw.size();
        return text::trim(raw.substr(begin, end - begin));
    };

    const std::string_view findings =
        section_body(findings_pos, 8, impression_pos);
    const std::string_view impression =
        section_body(impression_pos, 10, findings_pos);

    if (findings.empty()) throw MissingSectionError(Section::Findings, "report " + id + " (empty body)");
    if (impression.empty()) throw MissingSectionError(Section::Impression, "report " + id + " (empty body)");

    return RadiologyReport{std::move(id), std::string(findings), std::string(impression)};
}

bool is_eligible(const RadiologyReport& report) {
    return text::word_count(report.findings) >= kMinFindingsWords &&
           text::word_count(report.impression) >= kMinImpressionWords;
}

std::vector<RadiologyReport> filter_eligible(std::span<const RadiologyReport> reports) {
    std::vector<RadiologyReport> kept;
    kept.reserve(reports.size());
    for (const auto& report : reports) {
        if (is_eligible(report)) kept.push_back(report);
    }
    return kept;
}

std::vector<RadiologyReport> load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open corpus file: " + path.string());

    std::vector<RadiologyReport> reports;
    std::unordered_set<std::string> seen_ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        ordered_json record;
        try {
            record = ordered_json::parse(line);
        } catch (const ordered_json::parse_error& e) {
            throw DataError(path.string() + ":" + std::to_string(line_no) +
                            ": malformed record: " + e.what());
        }
        if (!record.is_object() || !record.contains("id") || !record["id"].is_string() ||
            !record.contains("findings") || !record["findings"].is_string() ||
            !record.contains("impression") || !record["impression"].is_string()) {
            throw DataError(path.string() + ":" + std::to_string(line_no) +
                            ": record must have string fields id, findings, impression");
        }
        RadiologyReport report{record["id"].get<std::string>(),
                               record["findings"].get<std::string>(),
                               record["impression"].get<std::string>()};
        if (!seen_ids.insert(report.id).second) {
            throw DataError(path.string() + ":" + std::to_string(line_no) +
                            ": duplicate report id: " + report.id);
        }
        reports.push_back(std::move(report));
    }
    return reports;
}

void save_corpus(std::span<const RadiologyReport> reports, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write corpus file: " + path.string());
    for (const auto& report : reports) {
        ordered_json record;
        record["id"] = report.id;
        record["findings"] = report.findings;
        record["impression"] = report.impression;
        out << record.dump() << '\n';
    }
    if (!out) throw DataError("write failed: " + path.string());
}

CorpusStats compute_stats(std::span<const RadiologyReport> reports) {
    CorpusStats stats;
    stats.report_count = static_cast<int>(reports.size());
    if (reports.empty()) return stats;

    long words_findings = 0, words_impression = 0;
    long sentences_findings = 0, sentences_impression = 0;
    for (const auto& report : reports) {
        words_findings += text::word_count(report.findings);
        words_impression += text::word_count(report.impression);
        sentences_findings += text::sentence_count(report.findings);
        sentences_impression += text::sentence_count(report.impression);
    }
    const double n = static_cast<double>(reports.size());
    stats.avg_words_findings = static_cast<double>(words_findings) / n;
    stats.avg_words_impression = static_cast<double>(words_impression) / n;
    stats.avg_sentences_findings = static_cast<double>(sentences_findings) / n;
    stats.avg_sentences_impression = static_cast<double>(sentences_impression) / n;
    return stats;
}

}  // namespace rrsum
