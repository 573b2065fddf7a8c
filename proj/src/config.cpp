#include "shiftcraft/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace shiftcraft {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

bool valid_name(const std::string& s) {
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '_' || c == '-' || c == '.';
    });
}

}  // namespace

std::optional<std::string> ConfigDoc::get(const std::string& section,
                                          const std::string& key) const {
    const Entry* e = find(section, key);
    return e ? std::optional(e->value) : std::nullopt;
}

const ConfigDoc::Entry* ConfigDoc::find(const std::string& section,
                                        const std::string& key) const {
    for (const Entry& e : entries) {
        if (e.section == section && e.key == key) return &e;
    }
    return nullptr;
}

ConfigDoc parse_config(const std::string& text) {
    ConfigDoc doc;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;

        const int col = static_cast<int>(raw.find_first_not_of(" \t")) + 1;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError("unterminated section header", lineno, col);
            }
            section = trim(line.substr(1, line.size() - 2));
            if (!valid_name(section)) {
                throw ConfigError("invalid section name '" + section + "'", lineno, col);
            }
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("expected 'key = value'", lineno, col);
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!valid_name(key)) {
            throw ConfigError("invalid key '" + key + "'", lineno, col);
        }
        if (doc.find(section, key)) {
            throw ConfigError("duplicate key '" + key + "' in section [" + section + "]",
                              lineno, col);
        }
        doc.entries.push_back({section, key, value, lineno, col});
    }
    return doc;
}

ConfigDoc parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

double entry_double(const ConfigDoc::Entry& e) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(e.value, &pos);
        if (pos != e.value.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("expected a number for '" + e.key + "'", e.line, e.column);
    }
}

int entry_int(const ConfigDoc::Entry& e) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(e.value, &pos);
        if (pos != e.value.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("expected an integer for '" + e.key + "'", e.line, e.column);
    }
}

std::uint64_t entry_u64(const ConfigDoc::Entry& e) {
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(e.value, &pos);
        if (pos != e.value.size()) throw std::invalid_argument("");
        return static_cast<std::uint64_t>(v);
    } catch (const std::exception&) {
        throw ConfigError("expected an unsigned integer for '" + e.key + "'", e.line, e.column);
    }
}

bool entry_bool(const ConfigDoc::Entry& e) {
    if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
    if (e.value == "false" || e.value == "0" || e.value == "no") return false;
    throw ConfigError("expected true/false for '" + e.key + "'", e.line, e.column);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream ss(value);
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace shiftcraft
