#include "kapparay/config.hpp"

#include <array>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>

namespace kapparay {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

}  // namespace

std::optional<double> parse_double(std::string_view s) {
    const std::string t = trim(s);
    if (t.empty()) return std::nullopt;
    const char* begin = t.data();
    if (*begin == '+') ++begin;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(begin, t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size()) return std::nullopt;
    return v;
}

std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
    (void)ec;
    return std::string(buf.data(), ptr);
}

std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 14695981039346656037ull;
    for (const unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str();
}

ConfigFile ConfigFile::parse(const std::string& text, const std::string& source) {
    ConfigFile cfg;
    cfg.source_ = source;
    cfg.text_ = text;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line_no = 0;
    const auto error = [&](const std::string& msg) {
        throw ConfigError(source + ":" + std::to_string(line_no) + ": " + msg);
    };
    while (std::getline(in, raw)) {
        ++line_no;
        if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') error("unterminated section header");
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            if (section.empty()) error("empty section name");
            if (cfg.sections_.count(section)) error("duplicate section [" + section + "]");
            cfg.sections_[section];
            cfg.section_lines_[section] = line_no;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) error("expected 'key = value'");
        if (section.empty()) error("key outside of any [section]");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        if (key.empty()) error("empty key");
        auto& entries = cfg.sections_[section];
        if (entries.count(key)) error("duplicate key '" + key + "' in [" + section + "]");
        entries[key] = Entry{trim(std::string_view(line).substr(eq + 1)), line_no};
    }
    return cfg;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path.string() + ": cannot open configuration file");
    std::ostringstream ss;
    ss << in.rdbuf();
    ConfigFile cfg = parse(ss.str(), path.string());
    cfg.base_dir_ = path.parent_path();
    return cfg;
}

const ConfigFile::Entry* ConfigFile::find(const std::string& section, const std::string& key) const {
    const auto s = sections_.find(section);
    if (s == sections_.end()) return nullptr;
    const auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    return find(section, key) != nullptr;
}

void ConfigFile::fail(const std::string& section, const std::string& key, const std::string& message) const {
    if (const Entry* e = find(section, key)) {
        throw ConfigError(source_ + ":" + std::to_string(e->line) + ": " + key + ": " + message);
    }
    const auto s = section_lines_.find(section);
    if (s != section_lines_.end()) {
        throw ConfigError(source_ + ":" + std::to_string(s->second) + ": [" + section + "] " + message);
    }
    throw ConfigError(source_ + ": [" + section + "] " + message);
}

void ConfigFile::require_known(const std::map<std::string, std::set<std::string>>& known) const {
    for (const auto& [section, entries] : sections_) {
        const auto allowed = known.find(section);
        if (allowed == known.end()) {
            throw ConfigError(source_ + ":" + std::to_string(section_lines_.at(section)) + ": unknown section [" +
                              section + "]");
        }
        for (const auto& [key, entry] : entries) {
            if (!allowed->second.count(key)) {
                throw ConfigError(source_ + ":" + std::to_string(entry.line) + ": unknown key '" + key + "' in [" +
                                  section + "]");
            }
        }
    }
}

std::optional<std::string> ConfigFile::get_string(const std::string& section, const std::string& key) const {
    const Entry* e = find(section, key);
    if (!e) return std::nullopt;
    return e->value;
}

std::optional<double> ConfigFile::get_double(const std::string& section, const std::string& key) const {
    const Entry* e = find(section, key);
    if (!e) return std::nullopt;
    const auto v = parse_double(e->value);
    if (!v) fail(section, key, "expected a number, got '" + e->value + "'");
    return v;
}

std::optional<long long> ConfigFile::get_int(const std::string& section, const std::string& key) const {
    const Entry* e = find(section, key);
    if (!e) return std::nullopt;
    long long v = 0;
    const std::string& s = e->value;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) fail(section, key, "expected an integer, got '" + s + "'");
    return v;
}

std::optional<std::vector<double>> ConfigFile::get_list(const std::string& section, const std::string& key) const {
    const Entry* e = find(section, key);
    if (!e) return std::nullopt;
    std::string s = e->value;
    for (char& c : s) {
        if (c == ',') c = ' ';
    }
    std::istringstream in(s);
    std::vector<double> out;
    std::string token;
    while (in >> token) {
        const auto v = parse_double(token);
        if (!v) fail(section, key, "expected a list of numbers, got '" + token + "'");
        out.push_back(*v);
    }
    return out;
}

double ConfigFile::require_double(const std::string& section, const std::string& key) const {
    const auto v = get_double(section, key);
    if (!v) fail(section, key, "missing required key '" + key + "'");
    return *v;
}

}  // namespace kapparay
