#include "rrsum/config.hpp"

#include "rrsum/text.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <vector>

namespace rrsum {

namespace {

std::string strip_comment(std::string_view line) {
    // Comments start at '#' or ';' outside of any value quoting (values are
    // plain strings here, so any occurrence starts a comment).
    const auto pos = line.find_first_of("#;");
    return std::string(pos == std::string_view::npos ? line : line.substr(0, pos));
}

}  // namespace

KeyValueConfig KeyValueConfig::parse_string(std::string_view content) {
    KeyValueConfig config;
    std::istringstream in{std::string(content)};
    std::string raw_line;
    std::string section;
    std::size_t line_no = 0;
    while (std::getline(in, raw_line)) {
        ++line_no;
        const std::string line{text::trim(strip_comment(raw_line))};
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": malformed section header: " + line);
            }
            section = std::string(text::trim(std::string_view(line).substr(1, line.size() - 2)));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": expected key = value: " + line);
        }
        const std::string key{text::trim(std::string_view(line).substr(0, eq))};
        const std::string value{text::trim(std::string_view(line).substr(eq + 1))};
        if (key.empty()) {
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        }
        const std::string full_key = section.empty() ? key : section + "." + key;
        config.values_[full_key] = value;
    }
    return config;
}

KeyValueConfig KeyValueConfig::parse_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_string(buffer.str());
}

bool KeyValueConfig::has(const std::string& key) const {
    return values_.contains(key);
}

std::string KeyValueConfig::get_string(const std::string& key, std::string fallback) const {
    const auto it = values_.find(key);
    return it != values_.end() ? it->second : std::move(fallback);
}

int KeyValueConfig::get_int(const std::string& key, int fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        std::size_t consumed = 0;
        const int value = std::stoi(it->second, &consumed);
        if (consumed == it->second.size()) return value;
    } catch (const std::exception&) {
    }
    throw ConfigError("config key '" + key + "' must be an integer, got '" + it->second + "'");
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        std::size_t consumed = 0;
        const double value = std::stod(it->second, &consumed);
        if (consumed == it->second.size()) return value;
    } catch (const std::exception&) {
    }
    throw ConfigError("config key '" + key + "' must be a number, got '" + it->second + "'");
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const std::string value = text::to_lower(it->second);
    if (value == "true" || value == "on" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "off" || value == "0" || value == "no") return false;
    throw ConfigError("config key '" + key + "' must be a boolean, got '" + it->second + "'");
}

void apply_config(const KeyValueConfig& config, RunConfig& run, BackendConfig& backend) {
    static const std::vector<std::string> known = {
        "backend.endpoint",        "backend.model",
        "backend.temperature",     "backend.max_output_tokens",
        "backend.timeout_ms",      "backend.max_retries",
        "backend.retry_backoff_ms","backend.max_in_flight",
        "backend.price_per_1k_prompt", "backend.price_per_1k_completion",
        "optimizer.n_similar",     "optimizer.threshold",
        "optimizer.max_iterations","optimizer.good_capacity",
        "optimizer.bad_capacity",  "optimizer.token_budget",
        "optimizer.early_stop_at", "search.subset_size",
        "search.seed",             "eval.mode",
        "eval.iterative",          "eval.limit",
        "eval.jobs",               "eval.seed",
        "templates.max_words",
    };
    for (const auto& [key, value] : config.values()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }

    backend.endpoint = config.get_string("backend.endpoint", backend.endpoint);
    backend.model = config.get_string("backend.model", backend.model);
    backend.temperature = config.get_double("backend.temperature", backend.temperature);
    backend.max_output_tokens = config.get_int("backend.max_output_tokens", backend.max_output_tokens);
    backend.timeout = std::chrono::milliseconds(
        config.get_int("backend.timeout_ms", static_cast<int>(backend.timeout.count())));
    backend.max_retries = config.get_int("backend.max_retries", backend.max_retries);
    backend.retry_backoff = std::chrono::milliseconds(config.get_int(
        "backend.retry_backoff_ms", static_cast<int>(backend.retry_backoff.count())));
    backend.max_in_flight = config.get_int("backend.max_in_flight", backend.max_in_flight);
    backend.price_per_1k_prompt =
        config.get_double("backend.price_per_1k_prompt", backend.price_per_1k_prompt);
    backend.price_per_1k_completion =
        config.get_double("backend.price_per_1k_completion", backend.price_per_1k_completion);

    run.optimizer.n_similar = config.get_int("optimizer.n_similar", run.optimizer.n_similar);
    run.optimizer.threshold = config.get_double("optimizer.threshold", run.optimizer.threshold);
    run.optimizer.max_iterations =
        config.get_int("optimizer.max_iterations", run.optimizer.max_iterations);
    if (config.has("optimizer.good_capacity")) {
        run.optimizer.good_capacity =
            capacity_from_name(config.get_string("optimizer.good_capacity", ""));
    }
    if (config.has("optimizer.bad_capacity")) {
        run.optimizer.bad_capacity =
            capacity_from_name(config.get_string("optimizer.bad_capacity", ""));
    }
    run.optimizer.token_budget = config.get_int("optimizer.token_budget", run.optimizer.token_budget);
    if (config.has("optimizer.early_stop_at")) {
        run.optimizer.early_stop_at = config.get_double("optimizer.early_stop_at", 0.0);
    }

    if (config.has("search.subset_size")) {
        const int subset = config.get_int("search.subset_size", 0);
        if (subset <= 0) throw ConfigError("search.subset_size must be positive");
        run.search.subset_size = static_cast<std::size_t>(subset);
    }
    run.search.seed = static_cast<std::uint32_t>(config.get_int("search.seed",
                                                                static_cast<int>(run.search.seed)));

    if (config.has("eval.mode")) {
        run.mode = prompt_mode_from_name(config.get_string("eval.mode", ""));
    }
    run.iterative = config.get_bool("eval.iterative", run.iterative);
    if (config.has("eval.limit")) {
        const int limit = config.get_int("eval.limit", 0);
        if (limit <= 0) throw ConfigError("eval.limit must be positive");
        run.limit = static_cast<std::size_t>(limit);
    }
    run.jobs = config.get_int("eval.jobs", run.jobs);
    run.seed = static_cast<std::uint32_t>(config.get_int("eval.seed", static_cast<int>(run.seed)));
    run.templates.max_words = config.get_int("templates.max_words", run.templates.max_words);

    run.price_per_1k_prompt = backend.price_per_1k_prompt;
    run.price_per_1k_completion = backend.price_per_1k_completion;
}

}  // namespace rrsum
