#include "oslab/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace oslab {

namespace {

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::string where(const std::string& name, int line) {
    return name + ":" + std::to_string(line) + ": ";
}

bool valid_name(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' && c != '.')
            return false;
    }
    return true;
}

std::vector<std::string> split_list(const std::string& raw, char extraSep) {
    std::vector<std::string> items;
    std::string cur;
    for (char c : raw) {
        if (c == ',' || c == extraSep || std::isspace(static_cast<unsigned char>(c))) {
            if (!cur.empty()) items.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) items.push_back(cur);
    return items;
}

} // namespace

Config Config::parse(std::istream& in, const std::string& name) {
    Config cfg;
    cfg.name_ = name;
    std::string line;
    std::string section;
    int lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(where(name, lineNo) + "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!valid_name(section))
                throw ConfigError(where(name, lineNo) + "bad section name '" + section + "'");
            cfg.sections_[section]; // section may legitimately stay empty
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(where(name, lineNo) + "expected key = value, got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!valid_name(key))
            throw ConfigError(where(name, lineNo) + "bad key name '" + key + "'");
        auto& sec = cfg.sections_[section];
        if (sec.count(key))
            throw ConfigError(where(name, lineNo) + "duplicate key '" + key + "' in section [" +
                              section + "]");
        sec[key] = value;
    }
    return cfg;
}

Config Config::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    return parse(in, path);
}

Config Config::from_string(const std::string& text, const std::string& name) {
    std::istringstream ss(text);
    return parse(ss, name);
}

bool Config::has(const std::string& section, const std::string& key) const {
    const auto it = sections_.find(section);
    return it != sections_.end() && it->second.count(key) > 0;
}

const std::string& Config::raw(const std::string& section, const std::string& key) const {
    const auto it = sections_.find(section);
    if (it == sections_.end())
        throw ConfigError(name_ + ": missing section [" + section + "]");
    const auto kit = it->second.find(key);
    if (kit == it->second.end())
        throw ConfigError(name_ + ": missing key '" + key + "' in section [" + section + "]");
    return kit->second;
}

std::string Config::get_string(const std::string& section, const std::string& key) const {
    return raw(section, key);
}

std::string Config::get_string(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
    return has(section, key) ? raw(section, key) : fallback;
}

long long Config::get_int(const std::string& section, const std::string& key) const {
    const std::string& v = raw(section, key);
    long long out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
        throw ConfigError(name_ + ": [" + section + "] " + key + " = '" + v +
                          "' is not an integer");
    return out;
}

long long Config::get_int(const std::string& section, const std::string& key,
                          long long fallback) const {
    return has(section, key) ? get_int(section, key) : fallback;
}

double Config::get_double(const std::string& section, const std::string& key) const {
    const std::string& v = raw(section, key);
    try {
        size_t used = 0;
        const double out = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument("trailing");
        return out;
    } catch (const std::exception&) {
        throw ConfigError(name_ + ": [" + section + "] " + key + " = '" + v +
                          "' is not a number");
    }
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
    return has(section, key) ? get_double(section, key) : fallback;
}

bool Config::get_bool(const std::string& section, const std::string& key, bool fallback) const {
    if (!has(section, key)) return fallback;
    std::string v = raw(section, key);
    std::transform(v.begin(), v.end(), v.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
    if (v == "false" || v == "no" || v == "off" || v == "0") return false;
    throw ConfigError(name_ + ": [" + section + "] " + key + " = '" + raw(section, key) +
                      "' is not a boolean");
}

std::vector<long long> Config::get_int_list(const std::string& section,
                                            const std::string& key) const {
    std::vector<long long> out;
    for (const auto& item : split_list(raw(section, key), ';')) {
        long long v = 0;
        const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
        if (res.ec != std::errc{} || res.ptr != item.data() + item.size())
            throw ConfigError(name_ + ": [" + section + "] " + key + " has non-integer item '" +
                              item + "'");
        out.push_back(v);
    }
    if (out.empty())
        throw ConfigError(name_ + ": [" + section + "] " + key + " is an empty list");
    return out;
}

std::vector<double> Config::get_double_list(const std::string& section,
                                            const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : split_list(raw(section, key), ';')) {
        try {
            size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ConfigError(name_ + ": [" + section + "] " + key + " has non-numeric item '" +
                              item + "'");
        }
    }
    if (out.empty())
        throw ConfigError(name_ + ": [" + section + "] " + key + " is an empty list");
    return out;
}

std::vector<std::complex<double>> Config::get_complex_list(const std::string& section,
                                                           const std::string& key) const {
    const std::string& v = raw(section, key);
    std::vector<std::complex<double>> out;
    std::stringstream ss(v);
    std::string pair;
    while (std::getline(ss, pair, ';')) {
        pair = trim(pair);
        if (pair.empty()) continue;
        const auto comma = pair.find(',');
        try {
            if (comma == std::string::npos) {
                out.emplace_back(std::stod(pair), 0.0);
            } else {
                out.emplace_back(std::stod(pair.substr(0, comma)),
                                 std::stod(pair.substr(comma + 1)));
            }
        } catch (const std::exception&) {
            throw ConfigError(name_ + ": [" + section + "] " + key + " has bad complex pair '" +
                              pair + "'");
        }
    }
    if (out.empty())
        throw ConfigError(name_ + ": [" + section + "] " + key + " is an empty list");
    return out;
}

std::string Config::canonical() const {
    std::ostringstream out;
    for (const auto& [section, entries] : sections_) {
        for (const auto& [key, value] : entries) {
            out << section << '.' << key << '=' << value << '\n';
        }
    }
    return out.str();
}

std::string Config::kind() const { return get_string("experiment", "kind"); }

} // namespace oslab
