#include "rrsum/report.hpp"

#include "../support/fixtures.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <random>

using namespace rrsum;
using testsupport::fixture;
using testsupport::slurp;

TEST_CASE("parse_report splits single-line sections") {
    const auto report = parse_report("FINDINGS: Lungs clear. IMPRESSION: No acute disease.", "x");
    CHECK(report.findings == "Lungs clear.");
    CHECK(report.impression == "No acute disease.");
}

TEST_CASE("parse_report reports the missing section") {
    CHECK_THROWS_AS(parse_report("IMPRESSION: ok", "x"), MissingSectionError);
    try {
        parse_report("IMPRESSION: ok", "x");
    } catch (const MissingSectionError& e) {
        CHECK(e.section() == Section::Findings);
    }
    CHECK_THROWS_AS(parse_report("FINDINGS: something here", "x"), MissingSectionError);
    CHECK_THROWS_AS(parse_report("no headers at all", "x"), MissingSectionError);
}

TEST_CASE("parse_report treats whitespace-only bodies as missing") {
    CHECK_THROWS_AS(parse_report("FINDINGS:   \n IMPRESSION: ok", "x"), MissingSectionError);
}

TEST_CASE("parse_report matches the hand-sectioned golden fixture") {
    const auto raw = slurp(fixture("raw/F-001.txt"));
    const auto golden = nlohmann::json::parse(slurp(fixture("f001_golden.json")));
    const auto report = parse_report(raw, "F-001");
    CHECK(report.findings == golden["findings"].get<std::string>());
    CHECK(report.impression == golden["impression"].get<std::string>());
}

TEST_CASE("parse_report is case-insensitive and order-tolerant") {
    const auto lower = parse_report(slurp(fixture("raw/F-002.txt")), "F-002");
    CHECK(lower.findings.starts_with("Heart size is mildly enlarged."));
    CHECK(lower.impression == "Mild cardiomegaly with small bilateral effusions.");

    const auto flipped = parse_report(slurp(fixture("raw/F-003.txt")), "F-003");
    CHECK(flipped.impression == "Persistent right pneumothorax, stable since the prior study.");
    CHECK(flipped.findings.starts_with("There is a persistent small right apical pneumothorax."));
    CHECK(flipped.findings.ends_with("current examination."));
}

namespace {

RadiologyReport with_words(std::string id, int findings_words, int impression_words) {
    const auto words = [](int n) {
        std::string out;
        for (int i = 0; i < n; ++i) {
            if (i) out += ' ';
            out += "w" + std::to_string(i);
        }
        return out;
    };
    return {std::move(id), words(findings_words), words(impression_words)};
}

}  // namespace

TEST_CASE("filter_eligible applies inclusive word thresholds") {
    const std::vector<RadiologyReport> reports = {
        with_words("below", 9, 5),      // findings one short
        with_words("boundary", 10, 2),  // inclusive boundary kept
        with_words("short-imp", 15, 1),
        with_words("ok", 15, 5),
    };
    const auto kept = filter_eligible(reports);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].id == "boundary");
    CHECK(kept[1].id == "ok");
}

TEST_CASE("filter_eligible hand-computed subset of 20 synthetic reports") {
    // Word counts chosen by hand; kept iff findings >= 10 and impression >= 2.
    const int findings_words[20] = {3, 9, 10, 11, 25, 8, 14, 10, 9, 40,
                                    12, 10, 7, 13, 10, 6, 22, 10, 9, 18};
    const int impression_words[20] = {5, 4, 1, 2, 0, 3, 2, 1, 2, 6,
                                      2, 3, 4, 0, 2, 2, 1, 5, 3, 2};
    std::vector<RadiologyReport> reports;
    for (int i = 0; i < 20; ++i) {
        reports.push_back(
            with_words("s" + std::to_string(i), findings_words[i], impression_words[i]));
    }
    const std::vector<std::string> expected = {"s3", "s6", "s9", "s10", "s11", "s14", "s17", "s19"};
    const auto kept = filter_eligible(reports);
    REQUIRE(kept.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) CHECK(kept[i].id == expected[i]);
}

TEST_CASE("filter_eligible is idempotent on random corpora") {
    std::mt19937 rng(7);
    std::vector<RadiologyReport> reports;
    for (int i = 0; i < 200; ++i) {
        reports.push_back(with_words("r" + std::to_string(i), static_cast<int>(rng() % 20),
                                     static_cast<int>(rng() % 5)));
    }
    const auto once = filter_eligible(reports);
    const auto twice = filter_eligible(once);
    CHECK(once == twice);
    for (const auto& report : once) CHECK(is_eligible(report));
}

TEST_CASE("save/load corpus round-trips exactly, including newlines") {
    testsupport::TempDir dir("corpus_roundtrip");
    const std::vector<RadiologyReport> reports = {
        {"a", "line one\nline two", "imp with \"quotes\" and \ttabs"},
        {"b", "unicode: x\xc3\xa9y", "trailing space "},
        {"c", "plain", "text"},
    };
    const auto path = dir.path() / "corpus.jsonl";
    save_corpus(reports, path);
    CHECK(load_corpus(path) == reports);
}

TEST_CASE("load_corpus reports malformed lines with their line number") {
    testsupport::TempDir dir("corpus_bad");
    const auto path = dir.path() / "bad.jsonl";
    {
        std::ofstream out(path);
        out << R"({"id":"a","findings":"ten","impression":"ok"})" << '\n';
        out << "{not json}\n";
    }
    CHECK_THROWS_WITH_AS(static_cast<void>(load_corpus(path)),
                         doctest::Contains(":2:"), DataError);
}

TEST_CASE("load_corpus rejects duplicate ids") {
    testsupport::TempDir dir("corpus_dup");
    const auto path = dir.path() / "dup.jsonl";
    {
        std::ofstream out(path);
        out << R"({"id":"a","findings":"x","impression":"y"})" << '\n';
        out << R"({"id":"a","findings":"x","impression":"y"})" << '\n';
    }
    CHECK_THROWS_AS(static_cast<void>(load_corpus(path)), DataError);
}

TEST_CASE("load_corpus ignores unknown fields") {
    testsupport::TempDir dir("corpus_extra");
    const auto path = dir.path() / "extra.jsonl";
    {
        std::ofstream out(path);
        out << R"({"id":"a","findings":"x","impression":"y","extra":123})" << '\n';
    }
    const auto reports = load_corpus(path);
    REQUIRE(reports.size() == 1);
    CHECK(reports[0].id == "a");
}

TEST_CASE("compute_stats matches the spreadsheet oracle on the bundled corpus") {
    const auto corpus = load_corpus(fixture("corpus20.jsonl"));
    const auto stats = compute_stats(corpus);
    CHECK(stats.report_count == 20);
    // Means computed independently with wc/awk over the fixture file.
    CHECK(stats.avg_words_findings == doctest::Approx(13.15).epsilon(1e-9));
    CHECK(stats.avg_words_impression == doctest::Approx(3.70).epsilon(1e-9));
    CHECK(stats.avg_sentences_findings == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(stats.avg_sentences_impression == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("compute_stats on an empty corpus is all zeros") {
    const auto stats = compute_stats({});
    CHECK(stats.report_count == 0);
    CHECK(stats.avg_words_findings == 0.0);
    CHECK(stats.avg_sentences_impression == 0.0);
}
