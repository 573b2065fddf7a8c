#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace shiftcraft {

// Raised on malformed config text; carries 1-based line and column.
struct ConfigError : std::runtime_error {
    int line, column;
    ConfigError(const std::string& msg, int line_, int col_)
        : std::runtime_error(msg + " (line " + std::to_string(line_) + ", column " +
                             std::to_string(col_) + ")"),
          line(line_),
          column(col_) {}
};

// Flat sectioned key-value text:
//   # comment
//   [section]
//   key = value
// Keys before any [section] land in the "" section. Duplicate keys within a
// section are rejected.
struct ConfigDoc {
    struct Entry {
        std::string section, key, value;
        int line = 0, column = 0;
    };
    std::vector<Entry> entries;

    std::optional<std::string> get(const std::string& section, const std::string& key) const;
    const Entry* find(const std::string& section, const std::string& key) const;
};

ConfigDoc parse_config(const std::string& text);
ConfigDoc parse_config_file(const std::string& path);

// Typed readers; a malformed value raises ConfigError at the entry's position.
double entry_double(const ConfigDoc::Entry& e);
int entry_int(const ConfigDoc::Entry& e);
std::uint64_t entry_u64(const ConfigDoc::Entry& e);
bool entry_bool(const ConfigDoc::Entry& e);
std::vector<std::string> split_list(const std::string& value);

}  // namespace shiftcraft
