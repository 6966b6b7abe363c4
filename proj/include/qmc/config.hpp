#pragma once

// Run configuration: flat key=value text with dotted section prefixes.
//
//   # comment
//   seed = 42
//   oracle.source = market
//   oracle.strike = 100
//   estimator.method = mle
//
// Unknown keys and unparsable values raise ConfigError naming the key.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "qmc/errors.hpp"
#include "qmc/estimators.hpp"
#include "qmc/oracle.hpp"
#include "qmc/resources.hpp"

namespace qmc {

struct OracleConfig {
  enum class Source { Direct, Market };
  Source source = Source::Direct;
  double amplitude = 0.3;
  MarketParams market;
  double strike = 100.0;
  std::optional<double> cap;
};

struct EstimatorConfig {
  Method method = Method::MleQAE;
  std::int64_t n_samples = 10000;
  int m_bits = 8;
  std::int64_t shots = kDefaultShotsPerRound;
  int max_depth_exponent = 6;
  double epsilon = 1e-2;
  double beta = 0.5;
  double noise = 0.0;
  std::int64_t buckets = 4;
  double budget_scale = 1.0;
  std::int64_t ramp_taper = 1;
  std::int64_t min_shots = 1;
};

struct HardwareConfig {
  double gates_per_sample = 1e3;
  double gate_error = 1e-6;
  double clock_ratio = 1.0;
  double epsilon = 1e-4;
  double fidelity = kDefaultFidelity;
  std::vector<double> gate_errors{1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9, 1e-10};
  std::vector<double> clock_ratios{1, 10, 100, 1000};
};

struct SweepConfig {
  enum class Param { NSamples, MaxDepthExponent, Epsilon };
  Param param = Param::MaxDepthExponent;
  std::vector<double> values;
  std::vector<double> betas{1.0 / 3.0, 2.0 / 3.0};
  std::int64_t trials = 100;
};

struct TradeoffConfig {
  std::vector<double> epsilons{1e-2, 1e-3, 1e-4, 1e-5};
  std::vector<double> betas{1.0, 2.0 / 3.0, 1.0 / 3.0, 0.0};
  double fidelity = kDefaultFidelity;
};

/// Oracle size for the algorithm resource table.
struct ResourcesConfig {
  double qubits = 10.0;
  double depth = 100.0;
};

struct OutputConfig {
  std::string path;
  std::string format = "csv";
};

struct RunConfig {
  OracleConfig oracle;
  EstimatorConfig estimator;
  HardwareConfig hardware;
  SweepConfig sweep;
  TradeoffConfig tradeoff;
  ResourcesConfig resources;
  OutputConfig output;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  /// Keys explicitly assigned, in any source.
  std::set<std::string> assigned;

  std::uint64_t require_seed() const {
    if (!seed) throw ConfigError("this command samples randomness and needs a seed (config key 'seed' or --seed)");
    return *seed;
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] inline void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
  throw ConfigError("invalid value '" + std::string(value) + "' for key '" + std::string(key) + "': expected " +
                    std::string(expected));
}

inline double parse_double(std::string_view key, std::string_view v) {
  v = trim(v);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    // Allow simple fractions such as 2/3 for beta values.
    const auto slash = v.find('/');
    if (slash != std::string_view::npos) {
      const double num = parse_double(key, v.substr(0, slash));
      const double den = parse_double(key, v.substr(slash + 1));
      if (den == 0.0) bad_value(key, v, "a non-zero denominator");
      return num / den;
    }
    bad_value(key, v, "a number");
  }
  return out;
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view v) {
  v = trim(v);
  Int out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) bad_value(key, v, "an integer");
  return out;
}

inline std::vector<double> parse_list(std::string_view key, std::string_view v) {
  std::vector<double> out;
  v = trim(v);
  while (!v.empty()) {
    const auto comma = v.find(',');
    out.push_back(parse_double(key, v.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    v = v.substr(comma + 1);
  }
  if (out.empty()) bad_value(key, v, "a comma-separated list of numbers");
  return out;
}

inline Method parse_method(std::string_view key, std::string_view v) {
  v = trim(v);
  for (auto m : {Method::ClassicalMC, Method::CanonicalQAE, Method::MleQAE, Method::KerenidisPrakash,
                 Method::ParallelSplit}) {
    if (v == to_string(m)) return m;
  }
  bad_value(key, v, "one of classical, canonical, mle, kp, parallel");
}

using Setter = std::function<void(RunConfig&, std::string_view key, std::string_view value)>;

inline const std::map<std::string, Setter, std::less<>>& config_setters() {
  static const std::map<std::string, Setter, std::less<>> table = [] {
    std::map<std::string, Setter, std::less<>> t;
    auto dbl = [&t](const char* k, auto member) {
      t[k] = [member](RunConfig& c, std::string_view key, std::string_view v) { member(c) = parse_double(key, v); };
    };
    auto i64 = [&t](const char* k, auto member) {
      t[k] = [member](RunConfig& c, std::string_view key, std::string_view v) {
        member(c) = parse_int<std::int64_t>(key, v);
      };
    };
    auto lst = [&t](const char* k, auto member) {
      t[k] = [member](RunConfig& c, std::string_view key, std::string_view v) { member(c) = parse_list(key, v); };
    };

    t["seed"] = [](RunConfig& c, std::string_view key, std::string_view v) {
      c.seed = parse_int<std::uint64_t>(key, v);
    };
    t["threads"] = [](RunConfig& c, std::string_view key, std::string_view v) {
      c.threads = parse_int<unsigned>(key, v);
    };

    t["oracle.source"] = [](RunConfig& c, std::string_view key, std::string_view v) {
      v = trim(v);
      if (v == "direct") {
        c.oracle.source = OracleConfig::Source::Direct;
      } else if (v == "market") {
        c.oracle.source = OracleConfig::Source::Market;
      } else {
        bad_value(key, v, "direct or market");
      }
    };
    dbl("oracle.amplitude", [](RunConfig& c) -> double& { return c.oracle.amplitude; });
    dbl("oracle.spot", [](RunConfig& c) -> double& { return c.oracle.market.spot; });
    dbl("oracle.rate", [](RunConfig& c) -> double& { return c.oracle.market.rate; });
    dbl("oracle.vol", [](RunConfig& c) -> double& { return c.oracle.market.vol; });
    dbl("oracle.maturity", [](RunConfig& c) -> double& { return c.oracle.market.maturity; });
    dbl("oracle.trunc_sigmas", [](RunConfig& c) -> double& { return c.oracle.market.trunc_sigmas; });
    dbl("oracle.strike", [](RunConfig& c) -> double& { return c.oracle.strike; });
    t["oracle.grid_bits"] = [](RunConfig& c, std::string_view key, std::string_view v) {
      c.oracle.market.grid_bits = parse_int<int>(key, v);
    };
    t["oracle.cap"] = [](RunConfig& c, std::string_view key, std::string_view v) {
      c.oracle.cap = parse_double(key, v);
    };

    t["estimator.method"] = [](RunConfig& c, std::string_view key, std::string_view v) {
      c.estimator.method = parse_method(key, v);
    };
    i64("estimator.n_samples", [](RunConfig& c) -> std::int64_t& { return c.estimator.n_samples; });
    t["estimator.m_bits"] = [](RunConfig& c, std::string_view key, std::string_view v) {
      c.estimator.m_bits = parse_int<int>(key, v);
    };
    i64("estimator.shots", [](RunConfig& c) -> std::int64_t& { return c.estimator.shots; });
    t["estimator.max_depth_exponent"] = [](RunConfig& c, std::string_view key, std::string_view v) {
      c.estimator.max_depth_exponent = parse_int<int>(key, v);
    };
    dbl("estimator.epsilon", [](RunConfig& c) -> double& { return c.estimator.epsilon; });
    dbl("estimator.beta", [](RunConfig& c) -> double& { return c.estimator.beta; });
    dbl("estimator.noise", [](RunConfig& c) -> double& { return c.estimator.noise; });
    i64("estimator.buckets", [](RunConfig& c) -> std::int64_t& { return c.estimator.buckets; });
    dbl("estimator.budget_scale", [](RunConfig& c) -> double& { return c.estimator.budget_scale; });
    i64("estimator.ramp_taper", [](RunConfig& c) -> std::int64_t& { return c.estimator.ramp_taper; });
    i64("estimator.min_shots", [](RunConfig& c) -> std::int64_t& { return c.estimator.min_shots; });

    dbl("hardware.gates_per_sample", [](RunConfig& c) -> double& { return c.hardware.gates_per_sample; });
    dbl("hardware.gate_error", [](RunConfig& c) -> double& { return c.hardware.gate_error; });
    dbl("hardware.clock_ratio", [](RunConfig& c) -> double& { return c.hardware.clock_ratio; });
    dbl("hardware.epsilon", [](RunConfig& c) -> double& { return c.hardware.epsilon; });
    dbl("hardware.fidelity", [](RunConfig& c) -> double& { return c.hardware.fidelity; });
    lst("hardware.gate_errors", [](RunConfig& c) -> std::vector<double>& { return c.hardware.gate_errors; });
    lst("hardware.clock_ratios", [](RunConfig& c) -> std::vector<double>& { return c.hardware.clock_ratios; });

    t["sweep.param"] = [](RunConfig& c, std::string_view key, std::string_view v) {
      v = trim(v);
      if (v == "n_samples") {
        c.sweep.param = SweepConfig::Param::NSamples;
      } else if (v == "max_depth_exponent") {
        c.sweep.param = SweepConfig::Param::MaxDepthExponent;
      } else if (v == "epsilon") {
        c.sweep.param = SweepConfig::Param::Epsilon;
      } else {
        bad_value(key, v, "n_samples, max_depth_exponent or epsilon");
      }
    };
    lst("sweep.values", [](RunConfig& c) -> std::vector<double>& { return c.sweep.values; });
    lst("sweep.betas", [](RunConfig& c) -> std::vector<double>& { return c.sweep.betas; });
    i64("sweep.trials", [](RunConfig& c) -> std::int64_t& { return c.sweep.trials; });

    lst("tradeoff.epsilons", [](RunConfig& c) -> std::vector<double>& { return c.tradeoff.epsilons; });
    lst("tradeoff.betas", [](RunConfig& c) -> std::vector<double>& { return c.tradeoff.betas; });
    dbl("tradeoff.fidelity", [](RunConfig& c) -> double& { return c.tradeoff.fidelity; });

    dbl("resources.qubits", [](RunConfig& c) -> double& { return c.resources.qubits; });
    dbl("resources.depth", [](RunConfig& c) -> double& { return c.resources.depth; });

    t["output.path"] = [](RunConfig& c, std::string_view, std::string_view v) { c.output.path = trim(v); };
    t["output.format"] = [](RunConfig& c, std::string_view key, std::string_view v) {
      v = trim(v);
      if (v != "csv" && v != "json") bad_value(key, v, "csv or json");
      c.output.format = v;
    };
    return t;
  }();
  return table;
}

inline bool is_market_key(std::string_view key) {
  return key == "oracle.spot" || key == "oracle.rate" || key == "oracle.vol" || key == "oracle.maturity" ||
         key == "oracle.grid_bits" || key == "oracle.trunc_sigmas" || key == "oracle.strike" || key == "oracle.cap";
}

}  // namespace detail

/// Applies one key=value assignment.
inline void set_config_value(RunConfig& config, std::string_view key, std::string_view value) {
  key = detail::trim(key);
  const auto& setters = detail::config_setters();
  const auto it = setters.find(key);
  if (it == setters.end()) throw ConfigError("unknown config key '" + std::string(key) + "'");
  it->second(config, key, value);
  config.assigned.insert(std::string(key));
}

/// Applies a "key=value" string, as given on the command line.
inline void apply_assignment(RunConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("expected key=value, got '" + std::string(assignment) + "'");
  }
  set_config_value(config, assignment.substr(0, eq), assignment.substr(eq + 1));
}

inline void apply_config(RunConfig& config, std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view s = line;
    if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = detail::trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key=value, got '" + std::string(s) + "'");
    }
    set_config_value(config, s.substr(0, eq), s.substr(eq + 1));
  }
}

inline void apply_config_file(RunConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  apply_config(config, in);
}

/// Fills in the oracle source when only market keys were given and rejects
/// configs that name both sources.
inline void finalize_config(RunConfig& config) {
  bool market_keys = false;
  std::string example;
  for (const auto& k : config.assigned) {
    if (detail::is_market_key(k)) {
      market_keys = true;
      example = k;
    }
  }
  const bool source_set = config.assigned.contains("oracle.source");
  if (!source_set && market_keys) config.oracle.source = OracleConfig::Source::Market;
  if (config.oracle.source == OracleConfig::Source::Direct && market_keys) {
    throw ConfigError("key '" + example + "' requires oracle.source=market");
  }
  if (config.oracle.source == OracleConfig::Source::Market && config.assigned.contains("oracle.amplitude")) {
    throw ConfigError("key 'oracle.amplitude' requires oracle.source=direct");
  }
  if (config.threads == 0) config.threads = 1;
}

inline OracleSpec make_oracle(const OracleConfig& oc) {
  if (oc.source == OracleConfig::Source::Direct) return OracleSpec::direct(oc.amplitude);
  return OracleSpec::market(discretize_lognormal(oc.market), Payoff{EuropeanCall{oc.strike}, oc.cap});
}

}  // namespace qmc
