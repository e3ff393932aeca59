#pragma once

// JSON config parsing. Field names:
//
//   distribution  {"family": "exponential", "params": {"rate": 1}}
//                 families and params: exponential{rate}, gamma{shape, rate},
//                 weibull{shape, scale}, erlang{stages, rate},
//                 hyperexponential{weights, rates}, pareto_lomax{shape, scale}
//   density       {"constant": {"c": 1}} | {"power": {"c": 0.2, "alpha": 0.8}}
//                 | {"tabulated": {"values": [...]}} | {"zipf_limit": {"alpha": 0.8}}
//   popularity    {"zipf": {"alpha": 0.8}} | {"density": <density>}
//   catalog       {"n", "total_rate", "popularity", "family"} or
//                 {"n", "total_rate", "classes": [{"weight", "density", "family"}]} or
//                 {"rates": [...], "family"}
//   envelope      <distribution> or "max" (pointwise max of the catalog families)
//   model         {"beta0", "classes": [{"weight", "density", "psi"}]} or
//                 {"beta0", "density", "psi"}

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "lruttl/asymptotics.hpp"
#include "lruttl/density.hpp"
#include "lruttl/distributions.hpp"
#include "lruttl/errors.hpp"
#include "lruttl/experiments.hpp"
#include "lruttl/popularity.hpp"
#include "lruttl/simulator.hpp"

namespace lruttl::config {

using nlohmann::json;

inline json load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::exception& e) {
    throw ConfigError("malformed config " + path + ": " + e.what());
  }
}

template <class T>
T get(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(std::string("missing config field \"") + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config field \"") + key + "\" has the wrong type");
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  return (j.is_object() && j.contains(key)) ? get<T>(j, key) : fallback;
}

inline InterRequestDistribution parse_distribution(const json& j) {
  const auto family = get<std::string>(j, "family");
  const json p = j.contains("params") ? j.at("params") : json::object();
  if (family == "exponential") return InterRequestDistribution::exponential(get_or<double>(p, "rate", 1.0));
  if (family == "gamma") return InterRequestDistribution::gamma(get<double>(p, "shape"), get<double>(p, "rate"));
  if (family == "weibull") return InterRequestDistribution::weibull(get<double>(p, "shape"), get<double>(p, "scale"));
  if (family == "erlang") return InterRequestDistribution::erlang(get<unsigned>(p, "stages"), get<double>(p, "rate"));
  if (family == "hyperexponential")
    return InterRequestDistribution::hyperexponential(get<std::vector<double>>(p, "weights"),
                                                      get<std::vector<double>>(p, "rates"));
  if (family == "pareto_lomax")
    return InterRequestDistribution::pareto_lomax(get<double>(p, "shape"), get<double>(p, "scale"));
  throw ConfigError("unknown distribution family \"" + family + "\"");
}

inline PopularityDensity parse_density(const json& j) {
  if (!j.is_object() || j.size() != 1) throw ConfigError("density must be an object with exactly one shape key");
  if (j.contains("constant")) return PopularityDensity::constant(get<double>(j.at("constant"), "c"));
  if (j.contains("power")) {
    const auto& p = j.at("power");
    return PopularityDensity::power(get<double>(p, "c"), get<double>(p, "alpha"));
  }
  if (j.contains("tabulated")) return PopularityDensity::tabulated(get<std::vector<double>>(j.at("tabulated"), "values"));
  if (j.contains("zipf_limit")) return PopularityDensity::zipf_limit(get<double>(j.at("zipf_limit"), "alpha"));
  throw ConfigError("unknown density shape");
}

inline PopularityLaw parse_popularity(const json& j) {
  if (j.is_object() && j.contains("zipf")) return ZipfLaw{get<double>(j.at("zipf"), "alpha")};
  if (j.is_object() && j.contains("density")) return DensityLaw{parse_density(j.at("density"))};
  throw ConfigError("popularity must be {\"zipf\": ...} or {\"density\": ...}");
}

inline InterRequestDistribution parse_family_or_default(const json& j, const char* key = "family") {
  return (j.is_object() && j.contains(key)) ? parse_distribution(j.at(key)) : InterRequestDistribution{};
}

inline ContentCatalog parse_catalog(const json& j) {
  if (j.contains("rates")) return catalog_from_rates(get<std::vector<double>>(j, "rates"), parse_family_or_default(j));
  const auto n = get<std::size_t>(j, "n");
  const double total_rate = get_or<double>(j, "total_rate", static_cast<double>(n));
  if (j.contains("classes")) {
    std::vector<CatalogClass> classes;
    for (const auto& c : j.at("classes"))
      classes.push_back({get<double>(c, "weight"), parse_density(c.at("density")), parse_family_or_default(c)});
    return build_multiclass_catalog(classes, n, total_rate);
  }
  if (!j.contains("popularity")) throw ConfigError("catalog needs \"popularity\", \"classes\" or \"rates\"");
  return build_catalog(parse_popularity(j.at("popularity")), n, total_rate, parse_family_or_default(j));
}

// Cache size from "cache_size", or "beta" times the catalog size.
inline double parse_cache_size(const json& j, std::size_t n) {
  if (j.contains("cache_size")) return get<double>(j, "cache_size");
  if (j.contains("beta")) return get<double>(j, "beta") * static_cast<double>(n);
  throw ConfigError("config needs \"cache_size\" or \"beta\"");
}

inline Envelope parse_envelope(const json& j, const ContentCatalog& catalog) {
  if (!j.contains("envelope") || (j.at("envelope").is_string() && j.at("envelope").get<std::string>() == "max"))
    return Envelope::pointwise_max(catalog.scale_families());
  return Envelope(parse_distribution(j.at("envelope")));
}

inline AsymptoticModel parse_model(const json& j) {
  const double beta0 = get<double>(j, "beta0");
  if (j.contains("classes")) {
    std::vector<ModelClass> classes;
    for (const auto& c : j.at("classes"))
      classes.push_back({get<double>(c, "weight"), parse_density(c.at("density")),
                         parse_family_or_default(c, "psi").standardized()});
    return AsymptoticModel(std::move(classes), beta0);
  }
  return AsymptoticModel(parse_density(j.at("density")), parse_family_or_default(j, "psi").standardized(), beta0);
}

// {"zipf_table": alpha} | {"zipf_exact": alpha} | {"explicit": g}
inline GnRule parse_gn_rule(const json& j) {
  if (j.contains("zipf_table")) return ZipfTableRule{get<double>(j, "zipf_table")};
  if (j.contains("zipf_exact")) return ZipfExactRule{get<double>(j, "zipf_exact")};
  if (j.contains("explicit")) return ExplicitRule{get<double>(j, "explicit")};
  throw ConfigError("g_n rule must be zipf_table, zipf_exact or explicit");
}

inline AssumptionParams parse_assumption_params(const json& j) {
  AssumptionParams p;
  if (!j.contains("assumptions")) return p;
  const auto& a = j.at("assumptions");
  p.kappa1 = get_or<double>(a, "kappa1", p.kappa1);
  p.kappa2 = get_or<double>(a, "kappa2", p.kappa2);
  p.gamma = get_or<double>(a, "gamma", p.gamma);
  if (a.contains("beta1")) p.beta1 = get<double>(a, "beta1");
  p.rho = get_or<double>(a, "rho", p.rho);
  return p;
}

// "simulation": {"policy": "lru" | "ttl", "timer": T | "characteristic",
//                "events", "warmup_events" | "warmup_time", "replications",
//                "tau_stride"}
inline SimulationConfig parse_simulation(const json& j, ContentCatalog catalog, double C, std::uint64_t seed) {
  const json s = j.contains("simulation") ? j.at("simulation") : json::object();
  const auto policy = get_or<std::string>(s, "policy", "lru");
  CachePolicy pol;
  if (policy == "lru") {
    const double r = std::round(C);
    if (std::abs(C - r) > 1e-9 || r < 1.0) throw ConfigError("LRU cache size must be a positive integer");
    pol = LruPolicy{static_cast<std::size_t>(r)};
  } else if (policy == "ttl") {
    if (s.contains("timer") && s.at("timer").is_number()) {
      pol = TtlPolicy{get<double>(s, "timer")};
    } else {
      pol = TtlPolicy{characteristic_time(catalog, C).T};
    }
  } else {
    throw ConfigError("policy must be \"lru\" or \"ttl\"");
  }
  Warmup warm = DefaultWarmup{};
  if (s.contains("warmup_events")) warm = EventCount{get<std::uint64_t>(s, "warmup_events")};
  if (s.contains("warmup_time")) warm = VirtualTime{get<double>(s, "warmup_time")};
  SimulationConfig cfg{std::move(catalog), pol, MeasuredEvents{get_or<std::uint64_t>(s, "events", 1000000)}, warm,
                       seed, get_or<std::size_t>(s, "replications", 1), get_or<std::size_t>(s, "tau_stride", 0),
                       1000000};
  return cfg;
}

// "sweep": {"n_values", "beta", "popularity", "family", "rate_per_content",
//           "events_per_point", "replications", "min_requests"}
inline SweepSpec parse_sweep(const json& j) {
  const json s = j.contains("sweep") ? j.at("sweep") : j;
  SweepSpec spec;
  spec.n_values = get_or<std::vector<std::size_t>>(s, "n_values", spec.n_values);
  spec.beta = get_or<double>(s, "beta", spec.beta);
  if (s.contains("popularity")) spec.law = parse_popularity(s.at("popularity"));
  if (s.contains("family")) spec.family = parse_distribution(s.at("family"));
  spec.rate_per_content = get_or<double>(s, "rate_per_content", spec.rate_per_content);
  spec.events_per_point = get_or<std::uint64_t>(s, "events_per_point", spec.events_per_point);
  spec.replications = get_or<std::size_t>(s, "replications", spec.replications);
  spec.min_requests = get_or<std::uint64_t>(s, "min_requests", spec.min_requests);
  return spec;
}

}  // namespace lruttl::config
