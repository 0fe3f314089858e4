#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace sohkit {

/// Plain-text `key = value` configuration file. Lines starting with '#' and
/// blank lines are ignored; list values are comma separated.
class KeyValueFile {
public:
    static KeyValueFile load(const std::string& path);
    static KeyValueFile parse(const std::string& text, const std::string& origin = "<string>");

    bool has(const std::string& key) const;

    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_doubles(const std::string& key) const;
    std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;
    std::vector<std::int64_t> get_ints(const std::string& key) const;
    std::vector<std::int64_t> get_ints(const std::string& key, const std::vector<std::int64_t>& fallback) const;
    std::vector<std::string> get_strings(const std::string& key) const;
    std::vector<std::string> get_strings(const std::string& key, const std::vector<std::string>& fallback) const;

    const std::map<std::string, std::string>& entries() const { return values_; }
    const std::string& origin() const { return origin_; }

private:
    std::map<std::string, std::string> values_;
    std::string origin_;
};

double parse_double(const std::string& text, const std::string& context);
std::int64_t parse_int(const std::string& text, const std::string& context);

}  // namespace sohkit
