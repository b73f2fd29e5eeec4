#pragma once

#include "rrsum/errors.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace rrsum {

// Categorical observation codes. Unmentioned is stored as 2 so that the
// codes can be compared arithmetically during similarity search.
enum class LabelCode : std::int8_t {
    Uncertain = -1,
    Absent = 0,
    Present = 1,
    Unmentioned = 2,
};

inline constexpr std::size_t kObservationCount = 14;

int code_value(LabelCode code);
LabelCode code_from_value(int value);  // throws DataError for values outside {-1,0,1,2}

struct Observation {
    int index;  // 0..13
    char letter;  // 'a'..'n'
    std::string_view name;
};

// The 14 chest observations in letter order 'a'..'n'.
const std::array<Observation, kObservationCount>& observations();

using LabelVector = std::array<LabelCode, kObservationCount>;

struct RuleSet {
    struct ObservationRule {
        std::string name;
        char letter = '?';
        std::vector<std::string> patterns;  // phrases, matched on lowercased tokens

        bool operator==(const ObservationRule&) const = default;
    };

    std::vector<ObservationRule> observations;  // exactly 14, ordered 'a'..'n'
    std::vector<std::string> negation_cues;
    std::vector<std::string> uncertainty_cues;
    int window = 6;  // max token gap between a cue and a mention, same sentence

    bool operator==(const RuleSet&) const = default;
};

// Bundled rule base covering all 14 observations. data/default_rules.json
// carries the same content for external tooling.
RuleSet default_rules();

// JSON rule file: {"window": int, "observations": [{"name","letter","patterns"}...],
// "negation_cues": [...], "uncertainty_cues": [...]}. Validation errors name
// the offending observation.
RuleSet load_rules(const std::filesystem::path& path);

void validate_rules(const RuleSet& rules);

// Per observation: Unmentioned if no pattern matches anywhere; otherwise
// Uncertain if an uncertainty cue falls within `window` tokens of a mention
// in the same sentence, else Absent if a negation cue does, else Present.
// Uncertainty outranks negation outranks presence, across all mentions of
// the observation. "No Finding" (letter 'a') is Present only when one of its
// normality phrases matches and every other observation is Absent or
// Unmentioned; it never takes cues. Deterministic and case-insensitive.
LabelVector label_report(std::string_view findings, const RuleSet& rules);

}  // namespace rrsum
