#include "rrsum/labeler.hpp"

#include "rrsum/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>

namespace rrsum {

int code_value(LabelCode code) {
    return static_cast<int>(code);
}

LabelCode code_from_value(int value) {
    switch (value) {
        case -1: return LabelCode::Uncertain;
        case 0: return LabelCode::Absent;
        case 1: return LabelCode::Present;
        case 2: return LabelCode::Unmentioned;
        default:
            throw DataError("invalid label code: " + std::to_string(value));
    }
}

const std::array<Observation, kObservationCount>& observations() {
    static const std::array<Observation, kObservationCount> table = {{
        {0, 'a', "No Finding"},
        {1, 'b', "Enlarged Cardiomediastinum"},
        {2, 'c', "Cardiomegaly"},
        {3, 'd', "Lung Lesion"},
        {4, 'e', "Lung Opacity"},
        {5, 'f', "Edema"},
        {6, 'g', "Consolidation"},
        {7, 'h', "Pneumonia"},
        {8, 'i', "Atelectasis"},
        {9, 'j', "Pneumothorax"},
        {10, 'k', "Pleural Effusion"},
        {11, 'l', "Pleural Other"},
        {12, 'm', "Fracture"},
        {13, 'n', "Support Devices"},
    }};
    return table;
}

RuleSet default_rules() {
    RuleSet rules;
    rules.window = 6;
    rules.observations = {
        {"No Finding", 'a',
         {"no acute cardiopulmonary process", "no acute cardiopulmonary abnormality",
          "no acute disease", "no acute findings", "no evidence of acute disease",
          "lungs are clear", "clear lungs", "normal chest", "unremarkable examination"}},
        {"Enlarged Cardiomediastinum", 'b',
         {"enlarged cardiomediastinum", "cardiomediastinal enlargement", "widened mediastinum",
          "mediastinal widening", "cardiomediastinal silhouette is enlarged",
          "widening of the mediastinum"}},
        {"Cardiomegaly", 'c',
         {"cardiomegaly", "enlarged heart", "cardiac enlargement", "heart is enlarged",
          "enlarged cardiac silhouette"}},
        {"Lung Lesion", 'd',
         {"lung lesion", "pulmonary nodule", "pulmonary nodules", "lung nodule", "lung mass",
          "pulmonary mass", "cavitary lesion"}},
        {"Lung Opacity", 'e',
         {"opacity", "opacities", "airspace disease", "infiltrate", "infiltrates",
          "interstitial markings", "reticular markings"}},
        {"Edema", 'f', {"edema", "vascular congestion", "pulmonary congestion"}},
        {"Consolidation", 'g', {"consolidation", "consolidations", "consolidative"}},
        {"Pneumonia", 'h', {"pneumonia", "pneumonitis", "infectious process"}},
        {"Atelectasis", 'i', {"atelectasis", "atelectatic", "volume loss", "lobar collapse"}},
        {"Pneumothorax", 'j', {"pneumothorax", "pneumothoraces"}},
        {"Pleural Effusion", 'k',
         {"pleural effusion", "pleural effusions", "effusion", "effusions", "pleural fluid"}},
        {"Pleural Other", 'l',
         {"pleural thickening", "pleural plaque", "pleural plaques", "pleural scarring",
          "fibrothorax"}},
        {"Fracture", 'm', {"fracture", "fractures", "fractured"}},
        {"Support Devices", 'n',
         {"endotracheal tube", "tracheostomy tube", "chest tube", "central venous catheter",
          "picc line", "pacemaker", "sternotomy wires", "catheter", "drain"}},
    };
    rules.negation_cues = {"no",          "not",      "without",      "free of",
                           "absent",      "absence of", "negative for", "resolved",
                           "clear of",    "rather than", "ruled out",   "removal of"};
    rules.uncertainty_cues = {"possible",        "possibly",
                              "probable",        "likely",
                              "may",             "might",
                              "cannot exclude",  "cannot be excluded",
                              "can not be excluded", "suspicious for",
                              "concerning for",  "concern for",
                              "question of",     "questionable",
                              "suggestive of",   "suggesting",
                              "versus",          "vs",
                              "borderline",      "equivocal"};
    return rules;
}

void validate_rules(const RuleSet& rules) {
    for (std::size_t i = 0; i < kObservationCount; ++i) {
        const char expected = static_cast<char>('a' + i);
        bool found = false;
        for (const auto& rule : rules.observations) {
            if (rule.letter == expected) {
                found = true;
                if (rule.patterns.empty()) {
                    throw DataError(std::string("observation '") + expected + "' (" + rule.name +
                                    ") has no mention patterns");
                }
                break;
            }
        }
        if (!found) {
            throw DataError(std::string("rule set missing observation '") + expected + "'");
        }
    }
    if (rules.observations.size() != kObservationCount) {
        throw DataError("rule set must define exactly 14 observations, got " +
                        std::to_string(rules.observations.size()));
    }
    if (rules.negation_cues.empty()) throw DataError("rule set has no negation cues");
    if (rules.uncertainty_cues.empty()) throw DataError("rule set has no uncertainty cues");
    if (rules.window < 1) throw DataError("cue window must be >= 1");
}

RuleSet load_rules(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open rules file: " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError(path.string() + ": malformed rules file: " + e.what());
    }

    RuleSet rules;
    rules.observations.clear();
    try {
        rules.window = doc.at("window").get<int>();
        for (const auto& entry : doc.at("observations")) {
            RuleSet::ObservationRule rule;
            rule.name = entry.at("name").get<std::string>();
            const auto letter = entry.at("letter").get<std::string>();
            if (letter.size() != 1) {
                throw DataError("observation '" + rule.name + "' has invalid letter");
            }
            rule.letter = letter[0];
            rule.patterns = entry.at("patterns").get<std::vector<std::string>>();
            rules.observations.push_back(std::move(rule));
        }
        rules.negation_cues = doc.at("negation_cues").get<std::vector<std::string>>();
        rules.uncertainty_cues = doc.at("uncertainty_cues").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + ": invalid rules file: " + e.what());
    }

    // Normalize to letter order so file ordering never matters.
    std::sort(rules.observations.begin(), rules.observations.end(),
              [](const auto& a, const auto& b) { return a.letter < b.letter; });
    validate_rules(rules);
    return rules;
}

namespace {

struct Span {
    std::size_t begin;  // first token index
    std::size_t end;    // last token index, inclusive
};

using Tokens = std::vector<std::string>;

// All occurrences of `phrase` as a consecutive token run.
void find_phrase(const Tokens& tokens, const Tokens& phrase, std::vector<Span>& out) {
    if (phrase.empty() || phrase.size() > tokens.size()) return;
    for (std::size_t i = 0; i + phrase.size() <= tokens.size(); ++i) {
        bool match = true;
        for (std::size_t j = 0; j < phrase.size(); ++j) {
            if (tokens[i + j] != phrase[j]) {
                match = false;
                break;
            }
        }
        if (match) out.push_back({i, i + phrase.size() - 1});
    }
}

// Token gap between two spans; 0 when they overlap.
std::size_t span_gap(const Span& a, const Span& b) {
    if (a.end < b.begin) return b.begin - a.end;
    if (b.end < a.begin) return a.begin - b.end;
    return 0;
}

bool any_cue_within(const std::vector<Span>& cues, const Span& mention, std::size_t window) {
    return std::any_of(cues.begin(), cues.end(), [&](const Span& cue) {
        return span_gap(cue, mention) <= window;
    });
}

struct SentenceScan {
    Tokens tokens;
    std::vector<Span> negations;
    std::vector<Span> uncertainties;
};

}  // namespace

LabelVector label_report(std::string_view findings, const RuleSet& rules) {
    validate_rules(rules);

    // Tokenized patterns, indexed like rules.observations (letter order).
    std::vector<std::vector<Tokens>> patterns(kObservationCount);
    for (std::size_t i = 0; i < kObservationCount; ++i) {
        for (const auto& phrase : rules.observations[i].patterns) {
            patterns[i].push_back(text::tokenize(phrase));
        }
    }
    std::vector<Tokens> negation_phrases, uncertainty_phrases;
    for (const auto& cue : rules.negation_cues) negation_phrases.push_back(text::tokenize(cue));
    for (const auto& cue : rules.uncertainty_cues) uncertainty_phrases.push_back(text::tokenize(cue));

    std::vector<SentenceScan> sentences;
    for (const auto& sentence : text::split_sentences(findings)) {
        SentenceScan scan;
        scan.tokens = text::tokenize(sentence);
        if (scan.tokens.empty()) continue;
        for (const auto& phrase : negation_phrases) find_phrase(scan.tokens, phrase, scan.negations);
        for (const auto& phrase : uncertainty_phrases) {
            find_phrase(scan.tokens, phrase, scan.uncertainties);
        }
        sentences.push_back(std::move(scan));
    }

    const auto window = static_cast<std::size_t>(rules.window);
    LabelVector codes;
    codes.fill(LabelCode::Unmentioned);

    // Observations b..n take the cue logic; 'a' is resolved afterwards.
    for (std::size_t obs = 1; obs < kObservationCount; ++obs) {
        bool mentioned = false, uncertain = false, negated = false;
        for (const auto& sentence : sentences) {
            std::vector<Span> mentions;
            for (const auto& phrase : patterns[obs]) find_phrase(sentence.tokens, phrase, mentions);
            for (const auto& mention : mentions) {
                mentioned = true;
                if (any_cue_within(sentence.uncertainties, mention, window)) {
                    uncertain = true;
                } else if (any_cue_within(sentence.negations, mention, window)) {
                    negated = true;
                }
            }
        }
        if (!mentioned) continue;
        codes[obs] = uncertain ? LabelCode::Uncertain
                               : (negated ? LabelCode::Absent : LabelCode::Present);
    }

    // 'No Finding': a normality phrase must match and every other observation
    // must be Absent or Unmentioned.
    bool normality = false;
    for (const auto& sentence : sentences) {
        std::vector<Span> mentions;
        for (const auto& phrase : patterns[0]) find_phrase(sentence.tokens, phrase, mentions);
        if (!mentions.empty()) {
            normality = true;
            break;
        }
    }
    if (normality) {
        const bool others_clear =
            std::all_of(codes.begin() + 1, codes.end(), [](LabelCode code) {
                return code == LabelCode::Absent || code == LabelCode::Unmentioned;
            });
        if (others_clear) codes[0] = LabelCode::Present;
    }

    return codes;
}

}  // namespace rrsum
