#pragma once

// Sectioned key-value configuration files:
//
//   # comment
//   [section]
//   key = value
//
// Sections may repeat (e.g. one [segment] per excitation segment). Keys before the
// first header belong to an unnamed global section.

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "jetid/error.hpp"
#include "jetid/format.hpp"

namespace jetid {

struct ConfigEntry {
    std::string key;
    std::string value;
    int line = 0;
};

struct ConfigSection {
    std::string name;
    int line = 0;
    std::vector<ConfigEntry> entries;

    const ConfigEntry* find(std::string_view key) const {
        const ConfigEntry* hit = nullptr;
        for (const auto& e : entries) {
            if (e.key == key) {
                hit = &e;
            }
        }
        return hit;
    }

    bool has(std::string_view key) const { return find(key) != nullptr; }

    /// Throws ParseError naming the line of the first key not in `allowed`.
    void require_known(std::initializer_list<std::string_view> allowed) const {
        for (const auto& e : entries) {
            bool ok = false;
            for (auto a : allowed) {
                ok = ok || e.key == a;
            }
            if (!ok) {
                throw Error(ErrorCode::ParseError, "line " + std::to_string(e.line) + ": unknown key '" + e.key +
                                                       "' in section [" + name + "]");
            }
        }
    }

    const ConfigEntry& require(std::string_view key) const {
        const auto* e = find(key);
        if (!e) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": section [" + name +
                                                   "] is missing '" + std::string(key) + "'");
        }
        return *e;
    }

    double get_double(std::string_view key) const {
        require(key);
        return get_double(key, 0.0);
    }

    std::string get_string(std::string_view key) const { return require(key).value; }

    double get_double(std::string_view key, double fallback) const {
        const auto* e = find(key);
        if (!e) {
            return fallback;
        }
        double v = 0.0;
        if (!parse_double(e->value, v) || !std::isfinite(v)) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(e->line) + ": '" + e->key +
                                                   "' expects a number, got '" + e->value + "'");
        }
        return v;
    }

    long long get_int(std::string_view key, long long fallback) const {
        const auto* e = find(key);
        if (!e) {
            return fallback;
        }
        long long v = 0;
        if (!parse_int(e->value, v)) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(e->line) + ": '" + e->key +
                                                   "' expects an integer, got '" + e->value + "'");
        }
        return v;
    }

    std::string get_string(std::string_view key, std::string fallback) const {
        const auto* e = find(key);
        return e ? e->value : fallback;
    }
};

struct Config {
    std::vector<ConfigSection> sections;

    const ConfigSection* section(std::string_view name) const {
        for (const auto& s : sections) {
            if (s.name == name) {
                return &s;
            }
        }
        return nullptr;
    }

    std::vector<const ConfigSection*> all(std::string_view name) const {
        std::vector<const ConfigSection*> out;
        for (const auto& s : sections) {
            if (s.name == name) {
                out.push_back(&s);
            }
        }
        return out;
    }

    /// Rejects sections whose name is not listed.
    void require_sections(std::initializer_list<std::string_view> allowed) const {
        for (const auto& s : sections) {
            bool ok = false;
            for (auto a : allowed) {
                ok = ok || s.name == a;
            }
            if (!ok) {
                throw Error(ErrorCode::ParseError,
                            "line " + std::to_string(s.line) + ": unknown section [" + s.name + "]");
            }
        }
    }
};

inline Config parse_config(std::string_view text) {
    Config cfg;
    cfg.sections.push_back(ConfigSection{"", 0, {}});
    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": malformed section header");
            }
            cfg.sections.push_back(ConfigSection{std::string(trim(line.substr(1, line.size() - 2))), line_no, {}});
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected key = value");
        }
        const auto key = trim(line.substr(0, eq));
        if (key.empty()) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": empty key");
        }
        cfg.sections.back().entries.push_back({std::string(key), std::string(trim(line.substr(eq + 1))), line_no});
    }
    return cfg;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open '" + path + "' for reading");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::string& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
    }
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) {
        throw Error(ErrorCode::IoError, "write failed for '" + path + "'");
    }
}

inline Config load_config(const std::string& path) { return parse_config(read_text_file(path)); }

} // namespace jetid
