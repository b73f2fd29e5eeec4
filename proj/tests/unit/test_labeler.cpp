#include "rrsum/labeler.hpp"

#include "rrsum/text.hpp"

#include "../support/fixtures.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <fstream>
#include <random>
#include <sstream>

using namespace rrsum;
using testsupport::fixture;

namespace {

LabelVector codes_from_json(const nlohmann::json& values) {
    REQUIRE(values.size() == kObservationCount);
    LabelVector vector;
    for (std::size_t i = 0; i < kObservationCount; ++i) {
        vector[i] = code_from_value(values[i].get<int>());
    }
    return vector;
}

int obs_index(char letter) {
    return letter - 'a';
}

}  // namespace

TEST_CASE("observation table is a bijection over letters a..n") {
    const auto& table = observations();
    REQUIRE(table.size() == 14);
    for (std::size_t i = 0; i < table.size(); ++i) {
        CHECK(table[i].index == static_cast<int>(i));
        CHECK(table[i].letter == static_cast<char>('a' + i));
    }
}

TEST_CASE("empty findings label as all unmentioned") {
    const auto codes = label_report("", default_rules());
    for (const auto code : codes) CHECK(code == LabelCode::Unmentioned);
}

TEST_CASE("negation and uncertainty resolve against the mention window") {
    const auto rules = default_rules();

    const auto negated = label_report("There is no pneumothorax.", rules);
    CHECK(negated[obs_index('j')] == LabelCode::Absent);
    for (std::size_t i = 0; i < kObservationCount; ++i) {
        if (static_cast<int>(i) != obs_index('j')) CHECK(negated[i] == LabelCode::Unmentioned);
    }

    const auto uncertain = label_report("Possible right lower lobe pneumonia.", rules);
    CHECK(uncertain[obs_index('h')] == LabelCode::Uncertain);
}

TEST_CASE("label_report reproduces every hand-assigned code of the sentence fixture") {
    const auto rules = default_rules();
    std::ifstream in(fixture("labeler_sentences.jsonl"));
    REQUIRE(in.good());

    std::string line;
    int checked = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto record = nlohmann::json::parse(line);
        const auto expected = codes_from_json(record["codes"]);
        const auto actual = label_report(record["text"].get<std::string>(), rules);
        INFO("sentence: ", record["text"].get<std::string>());
        CHECK(actual == expected);
        ++checked;
    }
    CHECK(checked == 30);
}

TEST_CASE("bundled rule file equals the built-in default rules") {
    const auto loaded = load_rules(testsupport::data_dir() / "default_rules.json");
    CHECK(loaded == default_rules());
}

TEST_CASE("rule files missing an observation name the gap") {
    testsupport::TempDir dir("rules_missing");
    auto rules = default_rules();
    rules.observations.erase(rules.observations.begin() + obs_index('k'));

    nlohmann::json doc;
    doc["window"] = rules.window;
    doc["observations"] = nlohmann::json::array();
    for (const auto& rule : rules.observations) {
        doc["observations"].push_back(
            {{"name", rule.name}, {"letter", std::string(1, rule.letter)}, {"patterns", rule.patterns}});
    }
    doc["negation_cues"] = rules.negation_cues;
    doc["uncertainty_cues"] = rules.uncertainty_cues;

    const auto path = dir.path() / "rules.json";
    std::ofstream(path) << doc.dump();
    CHECK_THROWS_WITH_AS(static_cast<void>(load_rules(path)), doctest::Contains("'k'"), DataError);
}

TEST_CASE("a rules file with an extra synonym flips a sentence from unmentioned to present") {
    const std::string sentence = "There is subsegmental plate-like scarring at the left base.";
    CHECK(label_report(sentence, default_rules())[obs_index('i')] == LabelCode::Unmentioned);

    // Same rule base with one synonym added to atelectasis, loaded from disk.
    auto rules = default_rules();
    rules.observations[obs_index('i')].patterns.push_back("plate like scarring");
    nlohmann::json doc;
    doc["window"] = rules.window;
    doc["observations"] = nlohmann::json::array();
    for (const auto& rule : rules.observations) {
        doc["observations"].push_back({{"name", rule.name},
                                       {"letter", std::string(1, rule.letter)},
                                       {"patterns", rule.patterns}});
    }
    doc["negation_cues"] = rules.negation_cues;
    doc["uncertainty_cues"] = rules.uncertainty_cues;

    testsupport::TempDir dir("rules_synonym");
    const auto path = dir.path() / "custom.json";
    std::ofstream(path) << doc.dump();

    const auto loaded = load_rules(path);
    CHECK(loaded == rules);
    CHECK(label_report(sentence, loaded)[obs_index('i')] == LabelCode::Present);
}

TEST_CASE("validation rejects empty cue lists and bad windows") {
    auto rules = default_rules();
    rules.negation_cues.clear();
    CHECK_THROWS_AS(validate_rules(rules), DataError);

    rules = default_rules();
    rules.window = 0;
    CHECK_THROWS_AS(validate_rules(rules), DataError);

    rules = default_rules();
    rules.observations[3].patterns.clear();
    CHECK_THROWS_WITH_AS(validate_rules(rules), doctest::Contains("'d'"), DataError);
}

TEST_CASE("labeling is deterministic and case-insensitive") {
    const auto rules = default_rules();
    const std::string sentences =
        "Moderate cardiomegaly. Possible pneumonia in the left lower lobe. No pleural effusion.";
    const auto base = label_report(sentences, rules);
    CHECK(base == label_report(sentences, rules));
    CHECK(base == label_report(text::to_lower(sentences), rules));

    std::string upper = sentences;
    for (auto& c : upper) c = (c >= 'a' && c <= 'z') ? static_cast<char>(c - 'a' + 'A') : c;
    CHECK(base == label_report(upper, rules));
}

TEST_CASE("codes are always in {-1,0,1,2} and vectors have length 14") {
    const auto rules = default_rules();
    std::mt19937 rng(11);
    const std::vector<std::string> vocabulary = {
        "no", "possible", "pneumothorax", "effusion", "cardiomegaly", "edema",
        "clear", "lungs", "are", "stable", "acute", "fracture", "catheter", "."};
    for (int trial = 0; trial < 200; ++trial) {
        std::string input;
        const std::size_t words = rng() % 24;
        for (std::size_t i = 0; i < words; ++i) {
            input += vocabulary[rng() % vocabulary.size()];
            input += ' ';
        }
        const auto codes = label_report(input, rules);
        CHECK(codes.size() == kObservationCount);
        for (const auto code : codes) {
            const int value = code_value(code);
            CHECK(value >= -1);
            CHECK(value <= 2);
        }
    }
}

TEST_CASE("removing every sentence that mentions an observation yields unmentioned") {
    const auto rules = default_rules();
    const std::string full =
        "Moderate cardiomegaly is present. There is a small right pleural effusion. "
        "No pneumothorax. The bones are intact.";

    for (std::size_t obs = 0; obs < kObservationCount; ++obs) {
        // Rebuild the text without any sentence whose labeling mentions obs.
        std::string reduced;
        for (const auto& sentence : text::split_sentences(full)) {
            const auto sentence_codes = label_report(sentence, rules);
            const bool mentions = sentence_codes[obs] != LabelCode::Unmentioned;
            if (!mentions) reduced += sentence + " ";
        }
        const auto codes = label_report(reduced, rules);
        CHECK(codes[obs] == LabelCode::Unmentioned);
    }
}
