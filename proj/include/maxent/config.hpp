#pragma once

// Line-oriented configuration: "key = value" pairs, optional [section]
// headers, '#' or ';' comments. Every key is registered with a type, a
// default and a constraint; anything else is rejected.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "maxent/errors.hpp"

namespace maxent {

class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

using ConfigValue = std::variant<double, long, bool, std::string, std::vector<double>>;

enum class ValueType { real, integer, boolean, text, real_list };

struct KeySpec {
  std::string name;
  std::string section;
  ValueType type;
  ConfigValue fallback;
  std::string help;
  std::function<std::string(const ConfigValue&)> check;  // empty string when valid
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

inline bool parse_real(const std::string& s, double& out) {
  if (s.empty()) return false;
  std::istringstream is(s);
  is.imbue(std::locale::classic());
  is >> out;
  return !is.fail() && is.eof() && std::isfinite(out);
}

inline bool parse_integer(const std::string& s, long& out) {
  const char* b = s.data();
  const char* e = s.data() + s.size();
  const auto r = std::from_chars(b, e, out);
  return !s.empty() && r.ec == std::errc() && r.ptr == e;
}

inline std::function<std::string(const ConfigValue&)> positive() {
  return [](const ConfigValue& v) -> std::string {
    if (const auto* d = std::get_if<double>(&v)) return *d > 0.0 ? "" : "must be > 0";
    if (const auto* i = std::get_if<long>(&v)) return *i > 0 ? "" : "must be > 0";
    return "";
  };
}

inline std::function<std::string(const ConfigValue&)> nonnegative() {
  return [](const ConfigValue& v) -> std::string {
    if (const auto* d = std::get_if<double>(&v)) return *d >= 0.0 ? "" : "must be >= 0";
    if (const auto* i = std::get_if<long>(&v)) return *i >= 0 ? "" : "must be >= 0";
    return "";
  };
}

inline std::function<std::string(const ConfigValue&)> one_of(std::vector<std::string> options) {
  return [options](const ConfigValue& v) -> std::string {
    const auto& s = std::get<std::string>(v);
    if (std::find(options.begin(), options.end(), s) != options.end()) return "";
    std::string msg = "must be one of";
    for (const auto& o : options) msg += " " + o;
    return msg;
  };
}

inline std::function<std::string(const ConfigValue&)> positive_list() {
  return [](const ConfigValue& v) -> std::string {
    for (double x : std::get<std::vector<double>>(v))
      if (!(x > 0.0)) return "entries must be > 0";
    return "";
  };
}

}  // namespace detail

inline const std::vector<KeySpec>& config_keys() {
  using namespace detail;
  using L = std::vector<double>;
  static const std::vector<KeySpec> keys = {
      {"epsilon", "general", ValueType::real, 0.01, "target accuracy", positive()},
      {"seed", "general", ValueType::integer, 1L, "random seed", nonnegative()},

      // density estimation on an interval (solve, slater)
      {"support_lo", "solve", ValueType::real, 0.0, "left end of the support", nullptr},
      {"support_hi", "solve", ValueType::real, 1.0, "right end of the support", nullptr},
      {"moments", "solve", ValueType::real_list,
       L{0.44269504088896344, 0.27865247955551825, 0.2022458674074696}, "observed raw moments", nullptr},
      {"uncertainty", "solve", ValueType::real, 0.01, "half-width of each moment interval", positive()},
      {"epsilons", "solve", ValueType::real_list, L{1.0, 0.1, 0.01}, "accuracy levels, one output row each",
       positive_list()},
      {"slater_degree", "solve", ValueType::integer, 5L, "polynomial degree of the Slater density", positive()},
      {"quadrature_nodes", "solve", ValueType::integer, 2049L, "Simpson nodes on the support", positive()},
      {"stopping", "solve", ValueType::text, std::string("apriori"), "apriori or aposteriori",
       one_of({"apriori", "aposteriori"})},
      {"diameter", "solve", ValueType::text, std::string("half_squared_norm"), "prox diameter policy",
       one_of({"half_squared_norm", "half_norm"})},
      {"density_samples", "solve", ValueType::integer, 512L, "points for sampled density curves", positive()},

      // finite state spaces
      {"states", "discrete", ValueType::real_list, L{0.0, 0.25, 0.5, 0.75, 1.0}, "state values", nullptr},
      {"reference", "discrete", ValueType::real_list, L{}, "reference weights, empty means uniform", nullptr},
      {"discrete_moments", "discrete", ValueType::real_list, L{0.45, 0.3}, "target raw moments", nullptr},
      {"discrete_uncertainty", "discrete", ValueType::real, 0.01, "half-width of each moment interval",
       positive()},

      // dimerization moment closure
      {"k1", "closure", ValueType::real, 1.0, "dimerization rate", positive()},
      {"k2", "closure", ValueType::real, 1.0, "dissociation rate", nonnegative()},
      {"M0", "closure", ValueType::integer, 10L, "initial monomers", nonnegative()},
      {"D0", "closure", ValueType::integer, 0L, "initial dimers", nonnegative()},
      {"kappa", "closure", ValueType::real, 0.01, "moment box half-width", positive()},
      {"order", "closure", ValueType::integer, 2L, "closure order (2 or 3)",
       [](const ConfigValue& v) -> std::string {
         const long o = std::get<long>(v);
         return o == 2 || o == 3 ? "" : "must be 2 or 3";
       }},
      {"t_end", "closure", ValueType::real, 1.0, "final time", positive()},
      {"dt", "closure", ValueType::real, 0.005, "output spacing", positive()},
      {"n_traj", "closure", ValueType::integer, 10000L, "SSA trajectories (0 skips SSA)", nonnegative()},
      {"parity_support", "closure", ValueType::boolean, false, "restrict closure support to reachable parity",
       nullptr},
      {"exact", "closure", ValueType::boolean, true, "also integrate the exact master equation", nullptr},

      // constrained inventory MDP
      {"capacity", "mdp", ValueType::real, 1.0, "storage capacity", positive()},
      {"lambda", "mdp", ValueType::real, 0.5, "demand rate", positive()},
      {"v", "mdp", ValueType::real, 1.0, "sale price", positive()},
      {"p", "mdp", ValueType::real, 0.5, "production cost", positive()},
      {"h", "mdp", ValueType::real, 0.1, "holding cost", positive()},
      {"scenarios", "mdp", ValueType::text, std::string("standard"), "standard (four constraint sets) or custom",
       one_of({"standard", "custom"})},
      {"ell1", "mdp", ValueType::real, 0.0, "lower bound on the mean stock (custom)", nonnegative()},
      {"ell2", "mdp", ValueType::real, 1.0, "upper bound on the stock second moment (custom)", nonnegative()},
      {"n", "mdp", ValueType::integer, 10L, "number of Fourier basis functions",
       [](const ConfigValue& v) -> std::string {
         const long n = std::get<long>(v);
         return n >= 2 && n % 2 == 0 ? "" : "must be a positive even number";
       }},
      {"theta", "mdp", ValueType::real, 3.0, "coefficient ball radius", positive()},
      {"zeta", "mdp", ValueType::real, 0.031622776601683794, "entropic regularization", positive()},
      {"grid_ns", "mdp", ValueType::integer, 101L, "state grid points", positive()},
      {"grid_na", "mdp", ValueType::integer, 101L, "action grid points", positive()},
      {"outer_k", "mdp", ValueType::integer, 1000L, "outer iterations", positive()},
      {"inner_iters", "mdp", ValueType::integer, 1500L, "inner solver iterations", positive()},
      {"eta", "mdp", ValueType::real, 1e-3, "inner smoothing parameters", positive()},
  };
  return keys;
}

inline const KeySpec* find_key(const std::string& name) {
  for (const auto& k : config_keys())
    if (k.name == name) return &k;
  return nullptr;
}

class Settings {
 public:
  Settings() {
    for (const auto& k : config_keys()) values_[k.name] = k.fallback;
  }

  template <class T>
  const T& get(const std::string& name) const {
    const auto it = values_.find(name);
    detail::require(it != values_.end(), "unknown configuration key '" + name + "'");
    return std::get<T>(it->second);
  }
  double real(const std::string& name) const { return get<double>(name); }
  long integer(const std::string& name) const { return get<long>(name); }
  bool flag(const std::string& name) const { return get<bool>(name); }
  const std::string& text(const std::string& name) const { return get<std::string>(name); }
  const std::vector<double>& list(const std::string& name) const { return get<std::vector<double>>(name); }
  bool was_set(const std::string& name) const { return set_.count(name) > 0; }

  /// Parses and stores one value. `where` prefixes error messages.
  void assign(const std::string& raw_key, const std::string& raw_value, const std::string& where) {
    std::string key = raw_key;
    if (const auto dot = key.find('.'); dot != std::string::npos) {
      const std::string section = key.substr(0, dot);
      key = key.substr(dot + 1);
      if (const KeySpec* spec = find_key(key); spec && spec->section != section)
        throw ConfigError(where + "key '" + key + "' belongs to section [" + spec->section + "], not [" + section +
                          "]");
    }
    const KeySpec* spec = find_key(key);
    if (!spec) throw ConfigError(where + "unknown key '" + key + "'; valid keys: " + valid_key_list());
    ConfigValue v;
    const std::string value = detail::trim(raw_value);
    const auto mismatch = [&](const char* expected) {
      return ConfigError(where + "key '" + key + "' expects " + expected + ", got '" + value + "'");
    };
    switch (spec->type) {
      case ValueType::real: {
        double d = 0.0;
        if (!detail::parse_real(value, d)) throw mismatch("a real number");
        v = d;
        break;
      }
      case ValueType::integer: {
        long i = 0;
        if (!detail::parse_integer(value, i)) throw mismatch("an integer");
        v = i;
        break;
      }
      case ValueType::boolean: {
        const std::string l = detail::lower(value);
        if (l == "true" || l == "1" || l == "yes" || l == "on") {
          v = true;
        } else if (l == "false" || l == "0" || l == "no" || l == "off") {
          v = false;
        } else {
          throw mismatch("a boolean");
        }
        break;
      }
      case ValueType::text:
        v = value;
        break;
      case ValueType::real_list: {
        std::vector<double> xs;
        std::stringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ',')) {
          double d = 0.0;
          if (!detail::parse_real(detail::trim(item), d)) throw mismatch("a comma-separated list of reals");
          xs.push_back(d);
        }
        v = std::move(xs);
        break;
      }
    }
    if (spec->check) {
      if (const std::string msg = spec->check(v); !msg.empty())
        throw ConfigError(where + "key '" + key + "' " + msg + " (got '" + value + "')");
    }
    values_[key] = std::move(v);
    set_[key] = true;
  }

  static std::string valid_key_list() {
    std::string out;
    for (const auto& k : config_keys()) out += (out.empty() ? "" : ", ") + k.name;
    return out;
  }

 private:
  std::map<std::string, ConfigValue> values_;
  std::map<std::string, bool> set_;
};

struct RunConfig {
  std::string subcommand;
  std::string config_path;
  std::string output_path;  ///< empty means stdout
  Settings settings;
};

inline const std::vector<std::string>& known_sections() {
  static const std::vector<std::string> s = {"general", "solve", "discrete", "closure", "mdp"};
  return s;
}

/// Parses configuration text into a RunConfig with defaults filled in.
inline RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (const auto c = line.find_first_of("#;"); c != std::string::npos) line.erase(c);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "malformed section header '" + line + "'");
      section = detail::trim(line.substr(1, line.size() - 2));
      const auto& ks = known_sections();
      if (std::find(ks.begin(), ks.end(), section) == ks.end())
        throw ConfigError(where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value, got '" + line + "'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = line.substr(eq + 1);
    cfg.settings.assign(section.empty() || key.find('.') != std::string::npos ? key : section + "." + key, value,
                        where);
  }
  return cfg;
}

inline RunConfig load_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace maxent
