#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace kapparay {

/// Malformed or invalid configuration; the message carries "source:line:" when known.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Flat sectioned key-value file:
///
///   # comment
///   [section]
///   key = value   # trailing comment
///
/// Keys are unique within a section. Nothing nests.
class ConfigFile {
public:
    struct Entry {
        std::string value;
        int line = 0;
    };

    static ConfigFile parse(const std::string& text, const std::string& source = "<config>");
    static ConfigFile load(const std::filesystem::path& path);

    bool has_section(const std::string& section) const { return sections_.count(section) != 0; }
    bool has(const std::string& section, const std::string& key) const;

    /// Rejects sections outside `known`, and keys outside known[section].
    void require_known(const std::map<std::string, std::set<std::string>>& known) const;

    std::optional<std::string> get_string(const std::string& section, const std::string& key) const;
    std::optional<double> get_double(const std::string& section, const std::string& key) const;
    std::optional<long long> get_int(const std::string& section, const std::string& key) const;
    /// Comma- and/or whitespace-separated numbers. An empty value gives an empty list.
    std::optional<std::vector<double>> get_list(const std::string& section, const std::string& key) const;

    double get_double_or(const std::string& section, const std::string& key, double fallback) const {
        return get_double(section, key).value_or(fallback);
    }
    double require_double(const std::string& section, const std::string& key) const;

    /// "source:line: message" for an entry, or "source: [section] message".
    [[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& message) const;

    const std::string& source() const { return source_; }
    const std::filesystem::path& base_dir() const { return base_dir_; }
    const std::string& text() const { return text_; }

private:
    const Entry* find(const std::string& section, const std::string& key) const;

    std::string source_;
    std::string text_;
    std::filesystem::path base_dir_;
    std::map<std::string, std::map<std::string, Entry>> sections_;
    std::map<std::string, int> section_lines_;
};

/// Parses a double with the classic "C" conventions regardless of locale.
std::optional<double> parse_double(std::string_view s);

/// Shortest round-trip-safe formatting with 17 significant digits, locale independent.
std::string format_double(double v);

/// 64-bit FNV-1a hash as 16 hex digits.
std::string fnv1a_hex(const std::string& data);

}  // namespace kapparay
