/// \file io.hpp
/// Deterministic text I/O: shortest round-trip number formatting, profile
/// CSV files (columns r,re[,im] preceded by a `# key: value` header block),
/// and the key = value run-configuration format.  No timestamps, no locale:
/// byte-identical reruns are part of the output contract.

#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "hardynls/error.hpp"
#include "hardynls/profile.hpp"
#include "hardynls/version.hpp"

namespace hardynls {

/// Shortest decimal that round-trips to the same double.
inline std::string fmt(double x) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline std::string fmt(int x) { return std::to_string(x); }
inline std::string fmt(long x) { return std::to_string(x); }
inline std::string fmt(std::size_t x) { return std::to_string(x); }

/// Strict double parse of a whole token (no trailing junk, finite).
inline double parse_double(std::string_view tok, Errc code,
                           const char* what) {
  double x = 0.0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), x);
  require(res.ec == std::errc() && res.ptr == tok.data() + tok.size() &&
              std::isfinite(x),
          code, std::string(what) + ": bad number '" + std::string(tok) + "'");
  return x;
}

using HeaderBlock = std::vector<std::pair<std::string, std::string>>;

/// Writes the `# key: value` header block; the tool version always leads.
inline void write_header(std::ostream& os, const HeaderBlock& kv) {
  os << "# hardy-nls " << version_string << "\n";
  for (const auto& [k, v] : kv) os << "# " << k << ": " << v << "\n";
}

/// Writes a profile as CSV.  The imaginary column is included only when the
/// data have one (an all-real profile stays two-column).
inline void write_profile_csv(std::ostream& os, const RadialProfile& u,
                              const HeaderBlock& kv) {
  validate(u);
  bool complex_data = false;
  for (const auto& z : u.val)
    if (z.imag() != 0.0) { complex_data = true; break; }
  write_header(os, kv);
  os << (complex_data ? "r,re,im\n" : "r,re\n");
  for (std::size_t i = 0; i < u.r.size(); ++i) {
    os << fmt(u.r[i]) << ',' << fmt(u.val[i].real());
    if (complex_data) os << ',' << fmt(u.val[i].imag());
    os << '\n';
  }
}

/// Reads a profile CSV: `# ...` lines are skipped, the column header must be
/// r,re or r,re,im, every row must match it.  Throws MalformedCsv on any
/// syntax defect and NonMonotoneGrid if the radii fail to increase.
inline RadialProfile read_profile_csv(std::istream& is, int d) {
  RadialProfile u;
  u.d = d;
  std::string line;
  bool have_columns = false;
  bool has_im = false;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!have_columns) {
      require(line == "r,re,im" || line == "r,re", Errc::MalformedCsv,
              "profile csv: expected column header r,re[,im], got '" + line +
                  "'");
      has_im = (line == "r,re,im");
      have_columns = true;
      continue;
    }
    std::string_view sv(line);
    std::vector<std::string_view> tok;
    while (true) {
      const auto pos = sv.find(',');
      tok.push_back(sv.substr(0, pos));
      if (pos == std::string_view::npos) break;
      sv.remove_prefix(pos + 1);
    }
    require(tok.size() == (has_im ? 3u : 2u), Errc::MalformedCsv,
            "profile csv: wrong column count on line " + fmt(lineno));
    const double r = parse_double(tok[0], Errc::MalformedCsv, "profile csv");
    const double re = parse_double(tok[1], Errc::MalformedCsv, "profile csv");
    const double im =
        has_im ? parse_double(tok[2], Errc::MalformedCsv, "profile csv") : 0.0;
    u.r.push_back(r);
    u.val.emplace_back(re, im);
  }
  require(have_columns && !u.r.empty(), Errc::MalformedCsv,
          "profile csv: no data rows");
  validate(u);  // throws NonMonotoneGrid / GridTooCoarse as appropriate
  return u;
}

inline RadialProfile read_profile_csv_file(const std::string& path, int d) {
  std::ifstream is(path);
  require(is.good(), Errc::IoError, "cannot open '" + path + "'");
  return read_profile_csv(is, d);
}

/// key = value configuration with `#` comments.  Every key must be consumed
/// by the reader and unknown keys are an error, so typos cannot silently
/// fall back to defaults.
class Config {
 public:
  static Config parse(std::istream& is) {
    Config cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const auto strip = [](std::string s) {
        const auto b = s.find_first_not_of(" \t");
        if (b == std::string::npos) return std::string();
        const auto e = s.find_last_not_of(" \t");
        return s.substr(b, e - b + 1);
      };
      if (strip(line).empty()) continue;
      const auto eq = line.find('=');
      require(eq != std::string::npos, Errc::ConfigError,
              "config line " + fmt(lineno) + ": expected key = value");
      const std::string key = strip(line.substr(0, eq));
      const std::string val = strip(line.substr(eq + 1));
      require(!key.empty() && !val.empty(), Errc::ConfigError,
              "config line " + fmt(lineno) + ": empty key or value");
      require(!cfg.values_.count(key), Errc::ConfigError,
              "config: duplicate key '" + key + "'");
      cfg.values_[key] = val;
    }
    return cfg;
  }

  static Config parse_file(const std::string& path) {
    std::ifstream is(path);
    require(is.good(), Errc::ConfigError, "cannot open config '" + path + "'");
    return parse(is);
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key) {
    auto it = values_.find(key);
    require(it != values_.end(), Errc::ConfigError,
            "config: missing required key '" + key + "'");
    consumed_.insert(key);
    return it->second;
  }

  std::string get_string(const std::string& key, const std::string& dflt) {
    return has(key) ? get_string(key) : dflt;
  }

  double get_double(const std::string& key) {
    return parse_double(get_string(key), Errc::ConfigError,
                        ("config key '" + key + "'").c_str());
  }

  double get_double(const std::string& key, double dflt) {
    return has(key) ? get_double(key) : dflt;
  }

  int get_int(const std::string& key, int dflt) {
    if (!has(key)) return dflt;
    const std::string s = get_string(key);
    int x = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    require(res.ec == std::errc() && res.ptr == s.data() + s.size(),
            Errc::ConfigError, "config key '" + key + "': bad integer");
    return x;
  }

  /// Call after reading everything: rejects keys nothing consumed.
  void finish() const {
    for (const auto& [k, v] : values_)
      require(consumed_.count(k) > 0, Errc::ConfigError,
              "config: unknown key '" + k + "'");
  }

 private:
  std::map<std::string, std::string> values_;
  std::set<std::string> consumed_;
};

}  // namespace hardynls
