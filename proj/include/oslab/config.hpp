#pragma once

#include <complex>
#include <cstdint>
#include <istream>
#include <map>
#include <string>
#include <vector>

#include "oslab/errors.hpp"

namespace oslab {

// Sectioned key=value configuration.
//
//   [experiment]
//   kind = gap-scan
//   seed = 7
//
//   [scan]
//   dims = 27, 81, 243
//
// '#' starts a comment, blank lines are ignored, keys before the first
// section header land in the "" section. Keys are unique per section;
// a repeat is a config error rather than a silent override.
class Config {
  public:
    static Config parse(std::istream& in, const std::string& name = "<stream>");
    static Config load(const std::string& path);
    static Config from_string(const std::string& text, const std::string& name = "<string>");

    bool has(const std::string& section, const std::string& key) const;

    std::string get_string(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const;

    long long get_int(const std::string& section, const std::string& key) const;
    long long get_int(const std::string& section, const std::string& key, long long fallback) const;

    double get_double(const std::string& section, const std::string& key) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;

    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;

    // Comma or whitespace separated lists.
    std::vector<long long> get_int_list(const std::string& section, const std::string& key) const;
    std::vector<double> get_double_list(const std::string& section, const std::string& key) const;

    // "re,im" pairs separated by semicolons: "0,0; 0.5,0.1".
    std::vector<std::complex<double>> get_complex_list(const std::string& section,
                                                       const std::string& key) const;

    // Sorted section.key=value lines, one per line. Two files that differ
    // only in comments, ordering, or spacing canonicalize identically.
    std::string canonical() const;

    const std::string& source_name() const { return name_; }

    // Convenience accessors for the [experiment] block.
    std::string kind() const;
    std::uint64_t seed() const { return static_cast<std::uint64_t>(get_int("experiment", "seed", 0)); }
    std::string out_dir() const { return get_string("experiment", "out", ""); }

  private:
    std::string name_;
    std::map<std::string, std::map<std::string, std::string>> sections_;

    const std::string& raw(const std::string& section, const std::string& key) const;
};

} // namespace oslab
