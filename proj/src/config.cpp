#include "sohkit/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "sohkit/errors.hpp"

namespace sohkit {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace

double parse_double(const std::string& text, const std::string& context) {
    double v = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end)
        throw ConfigError("expected a number for " + context + ", got '" + text + "'");
    return v;
}

std::int64_t parse_int(const std::string& text, const std::string& context) {
    std::int64_t v = 0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end)
        throw ConfigError("expected an integer for " + context + ", got '" + text + "'");
    return v;
}

KeyValueFile KeyValueFile::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path);
}

KeyValueFile KeyValueFile::parse(const std::string& text, const std::string& origin) {
    KeyValueFile cfg;
    cfg.origin_ = origin;
    std::stringstream ss(text);
    std::string line;
    int line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        const auto comment = line.find('#');
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(line_no) +
                              ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
        cfg.values_[key] = value;
    }
    return cfg;
}

bool KeyValueFile::has(const std::string& key) const { return values_.count(key) != 0; }

std::string KeyValueFile::get_string(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end())
        throw ConfigError(origin_ + ": missing required key '" + key + "'");
    return it->second;
}

std::string KeyValueFile::get_string(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double KeyValueFile::get_double(const std::string& key) const {
    return parse_double(get_string(key), origin_ + ":" + key);
}

double KeyValueFile::get_double(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    return get_double(key);
}

std::int64_t KeyValueFile::get_int(const std::string& key) const {
    return parse_int(get_string(key), origin_ + ":" + key);
}

std::int64_t KeyValueFile::get_int(const std::string& key, std::int64_t fallback) const {
    if (!has(key)) return fallback;
    return get_int(key);
}

bool KeyValueFile::get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = get_string(key);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(origin_ + ":" + key + ": expected a boolean, got '" + v + "'");
}

std::vector<double> KeyValueFile::get_doubles(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : split_list(get_string(key)))
        out.push_back(parse_double(item, origin_ + ":" + key));
    if (out.empty()) throw ConfigError(origin_ + ":" + key + ": empty list");
    return out;
}

std::vector<double> KeyValueFile::get_doubles(const std::string& key,
                                              const std::vector<double>& fallback) const {
    if (!has(key)) return fallback;
    return get_doubles(key);
}

std::vector<std::int64_t> KeyValueFile::get_ints(const std::string& key) const {
    std::vector<std::int64_t> out;
    for (const auto& item : split_list(get_string(key)))
        out.push_back(parse_int(item, origin_ + ":" + key));
    if (out.empty()) throw ConfigError(origin_ + ":" + key + ": empty list");
    return out;
}

std::vector<std::int64_t> KeyValueFile::get_ints(
    const std::string& key, const std::vector<std::int64_t>& fallback) const {
    if (!has(key)) return fallback;
    return get_ints(key);
}

std::vector<std::string> KeyValueFile::get_strings(const std::string& key) const {
    auto out = split_list(get_string(key));
    if (out.empty()) throw ConfigError(origin_ + ":" + key + ": empty list");
    return out;
}

std::vector<std::string> KeyValueFile::get_strings(
    const std::string& key, const std::vector<std::string>& fallback) const {
    if (!has(key)) return fallback;
    return get_strings(key);
}

}  // namespace sohkit
