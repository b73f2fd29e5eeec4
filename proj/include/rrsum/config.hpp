#pragma once

#include "rrsum/backend.hpp"
#include "rrsum/errors.hpp"
#include "rrsum/harness.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace rrsum {

// INI-style key/value file: [section] headers, key = value lines, '#' or ';'
// comments. Keys are stored as "section.key".
class KeyValueConfig {
public:
    static KeyValueConfig parse_file(const std::filesystem::path& path);
    static KeyValueConfig parse_string(std::string_view content);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key, std::string fallback) const;
    int get_int(const std::string& key, int fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

// Applies [backend], [optimizer], [search] and [eval] sections onto the run
// and backend configs. Unknown keys raise ConfigError.
void apply_config(const KeyValueConfig& config, RunConfig& run, BackendConfig& backend);

}  // namespace rrsum
