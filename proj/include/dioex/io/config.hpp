#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dioex/core.hpp"

namespace dioex {

struct ConfigKey {
  const char* key;
  const char* fallback;
  const char* help;
};

// Every accepted key with its default; anything else is rejected.
inline const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"freqs.omega", "sqrt:2", "frequency tuple, axes split by '|', entries by ';'"},
      {"freqs.d", "1", "dimension; a single axis is replicated d times"},
      {"freqs.precision", "256", "working precision in bits"},
      {"psi.tau", "1", "approximation exponent tau of psi(q) = c q^-tau ln(1+q)^p"},
      {"psi.c", "1", "constant c of psi"},
      {"psi.p", "0", "log exponent p of psi"},
      {"walk.nmax", "100", "number of walk steps"},
      {"walk.prune", "1e-16", "pruning threshold of the lattice distribution"},
      {"walk.neps", "1", "first step n_eps of the recurrence series"},
      {"walk.beta", "3", "exponent beta of the n^-beta/2 weights"},
      {"walk.eps", "0.2", "comma-separated eps grid"},
      {"walk.budget_mib", "1024", "memory budget of the lattice engine in MiB"},
      {"walk.qmax_factor", "64", "targeted engine search radius Qmax = factor / eps"},
      {"variance.T", "1", "comma-separated window radii"},
      {"variance.nmax", "400", "series truncation for the variance"},
      {"mc.reps", "2000", "Monte Carlo replications"},
      {"mc.grid", "16", "grid points per unit length"},
      {"mc.seed", "1", "master seed"},
      {"mc.u", "0", "excursion level"},
      {"mc.threads", "0", "worker threads (0: all cores); results do not depend on it"},
      {"output.directory", "", "write outputs into this directory instead of stdout"},
      {"output.format", "", "csv or json (default depends on the command)"},
  };
  return keys;
}

namespace detail {

inline std::string trim_copy(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return std::string(s);
}

inline bool known_key(const std::string& k) {
  for (const auto& c : config_keys())
    if (k == c.key) return true;
  return false;
}

}  // namespace detail

class ExperimentConfig {
 public:
  ExperimentConfig() {
    for (const auto& k : config_keys()) values_[k.key] = k.fallback;
  }

  // Lines `key = value`; '#' starts a comment.
  static ExperimentConfig parse(std::string_view text) {
    ExperimentConfig c;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineNo = 0;
    while (std::getline(in, line)) {
      ++lineNo;
      if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
      const std::string t = detail::trim_copy(line);
      if (t.empty()) continue;
      const auto eq = t.find('=');
      if (eq == std::string::npos)
        throw ParseError("config line " + std::to_string(lineNo) + ": expected 'key = value'");
      c.set(detail::trim_copy(std::string_view(t).substr(0, eq)), detail::trim_copy(std::string_view(t).substr(eq + 1)));
    }
    return c;
  }

  static ExperimentConfig load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ParseError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
  }

  void set(const std::string& key, const std::string& value) {
    if (!detail::known_key(key)) throw ParseError("unknown config key '" + key + "'");
    values_[key] = value;
  }

  const std::string& str(const std::string& key) const {
    auto it = values_.find(key);
    require(it != values_.end(), "unknown config key '" + key + "'");
    return it->second;
  }

  double real(const std::string& key) const { return parse_real(str(key), key); }

  std::int64_t integer(const std::string& key) const {
    const std::string& s = str(key);
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw ParseError("config key '" + key + "' expects an integer, got '" + s + "'");
    return v;
  }

  std::vector<double> reals(const std::string& key) const {
    std::vector<double> out;
    std::string item;
    std::istringstream in(str(key));
    while (std::getline(in, item, ',')) out.push_back(parse_real(detail::trim_copy(item), key));
    if (out.empty()) throw ParseError("config key '" + key + "' expects a comma-separated list");
    return out;
  }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  static double parse_real(const std::string& s, const std::string& key) {
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty())
      throw ParseError("config key '" + key + "' expects a number, got '" + s + "'");
    return v;
  }

  std::map<std::string, std::string> values_;
};

}  // namespace dioex
