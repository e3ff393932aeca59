#pragma once

// Convergence sweeps (LRU simulation against the TTL approximation over a
// range of catalog sizes), consolidated assumption checks and table output.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "lruttl/approx.hpp"
#include "lruttl/asymptotics.hpp"
#include "lruttl/distributions.hpp"
#include "lruttl/errors.hpp"
#include "lruttl/popularity.hpp"
#include "lruttl/simulator.hpp"

namespace lruttl {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct SweepSpec {
  std::vector<std::size_t> n_values{100, 400, 1600, 6400};
  double beta = 0.3;  // C_n = round(beta * n)
  PopularityLaw law = ZipfLaw{0.8};
  InterRequestDistribution family{};
  double rate_per_content = 1.0;  // Lambda_n = rate_per_content * n
  std::uint64_t events_per_point = 1000000;  // measured requests per replication
  std::size_t replications = 32;
  std::uint64_t min_requests = 1000;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
};

struct ConvergenceRow {
  std::size_t n = 0;
  double C_n = 0.0;
  double T_n = kNaN;
  // Gaps use the control-variate LRU estimate Hhat_i - (Hhat_i^TTL - H_i^TTL),
  // with the TTL cache simulated on the same requests; *_plain use Hhat_i.
  double gap_max = kNaN;        // max_i |Hhat_i - H_i^TTL(T_n)| over frequent contents
  double gap_aggregate = kNaN;  // |Hhat - H^TTL(T_n)|
  double stderr_max = kNaN;     // standard error of Hhat_i at the maximizing content
  double stderr_agg = kNaN;
  double fagin_limit = kNaN;
  double curve_quartic = kNaN;
  double curve_sqrt = kNaN;
  std::string status = "ok";
  std::size_t measured_contents = 0;
  std::size_t excluded_contents = 0;
  std::uint64_t min_requests = 0;
  double hit_lru = kNaN;
  double hit_ttl = kNaN;
  double gap_max_plain = kNaN;
  double stderr_max_plain = kNaN;
  double gap_aggregate_plain = kNaN;
  double stderr_agg_plain = kNaN;
};

inline const std::vector<std::string>& convergence_columns() {
  static const std::vector<std::string> cols{
      "n",          "C_n",         "T_n",           "gap_max",     "gap_aggregate",     "stderr_max",
      "stderr_agg", "fagin_limit", "curve_quartic", "curve_sqrt",  "status",            "measured_contents",
      "excluded_contents", "min_requests", "hit_lru", "hit_ttl", "gap_max_plain", "stderr_max_plain",
      "gap_aggregate_plain", "stderr_agg_plain"};
  return cols;
}

// Single-class Fagin model matching a sweep workload, when one exists.
inline std::optional<AsymptoticModel> fagin_model(const PopularityLaw& law, const InterRequestDistribution& family,
                                                  double beta0) {
  PopularityDensity f;
  if (const auto* z = std::get_if<ZipfLaw>(&law)) {
    if (!(z->alpha < 1.0)) return std::nullopt;
    f = PopularityDensity::zipf_limit(z->alpha);
  } else {
    const auto& d = std::get<DensityLaw>(law).f;
    const double mass = d.integral();
    f = std::visit(detail::overloaded{
                       [](const ConstantDensity&) { return PopularityDensity::constant(1.0); },
                       [mass](const PowerDensity& p) { return PopularityDensity::power(p.c / mass, p.alpha); },
                       [mass](const TabulatedDensity& t) {
                         auto v = t.values;
                         for (double& x : v) x /= mass;
                         return PopularityDensity::tabulated(std::move(v));
                       },
                   },
                   d.shape());
  }
  return AsymptoticModel(f, family.standardized(), beta0);
}

inline ConvergenceRow convergence_point(const SweepSpec& spec, std::size_t index) {
  ConvergenceRow row;
  const std::size_t n = spec.n_values.at(index);
  row.n = n;
  row.min_requests = spec.min_requests;
  try {
    const auto C = static_cast<std::size_t>(std::llround(spec.beta * static_cast<double>(n)));
    row.C_n = static_cast<double>(C);
    if (C == 0 || C >= n) throw ConfigError("C_n must lie in (0, n)");
    if (C > 1) {
      row.curve_quartic = rate_curve(RateKind::quartic, row.C_n);
      row.curve_sqrt = rate_curve(RateKind::sqrt, row.C_n);
    }
    try {
      if (auto model = fagin_model(spec.law, spec.family, spec.beta)) row.fagin_limit = hit_limit(*model).value;
    } catch (const std::exception&) {
      row.fagin_limit = kNaN;
    }
    const auto catalog = build_catalog(spec.law, n, spec.rate_per_content * static_cast<double>(n), spec.family);
    const auto ct = characteristic_time(catalog, row.C_n);
    row.T_n = ct.T;
    const auto ttl = ttl_hit(catalog, ct.T);
    row.hit_ttl = ttl.aggregate;

    SimulationConfig cfg{catalog, LruPolicy{C}, MeasuredEvents{spec.events_per_point}, DefaultWarmup{},
                         derive_key(spec.seed, index), spec.replications, 0, 0, ct.T};
    const auto rep = replicate(cfg, spec.threads);
    row.hit_lru = rep.aggregate;
    row.gap_aggregate = std::abs(rep.aggregate_diff);
    row.stderr_agg = rep.aggregate_diff_stderr;
    row.gap_aggregate_plain = std::abs(rep.aggregate - ttl.aggregate);
    row.stderr_agg_plain = rep.aggregate_stderr;
    double best = -1.0;
    double best_plain = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (rep.requests[i] < spec.min_requests) {
        ++row.excluded_contents;
        continue;
      }
      ++row.measured_contents;
      const double g = std::abs(rep.diff_rate[i]);
      if (g > best) {
        best = g;
        row.stderr_max = rep.diff_stderr[i];
      }
      const double gp = std::abs(rep.hit_rate[i] - ttl.per_content[i]);
      if (gp > best_plain) {
        best_plain = gp;
        row.stderr_max_plain = rep.stderr_hit[i];
      }
    }
    if (best >= 0.0) row.gap_max = best;
    if (best_plain >= 0.0) row.gap_max_plain = best_plain;
  } catch (const std::exception& e) {
    row.status = std::string("failed: ") + e.what();
  }
  return row;
}

// One row per n in order; failing points are marked, not dropped.
inline std::vector<ConvergenceRow> convergence_sweep(const SweepSpec& spec) {
  for (std::size_t k = 0; k < spec.n_values.size(); ++k) {
    if (spec.n_values[k] == 0) throw ConfigError("n values must be positive");
    if (k > 0 && spec.n_values[k] <= spec.n_values[k - 1]) throw ConfigError("n values must be increasing");
  }
  if (!(spec.beta > 0.0 && spec.beta < 1.0)) throw ConfigError("beta must lie in (0, 1)");
  if (spec.replications == 0) throw ConfigError("replications must be at least 1");
  std::vector<ConvergenceRow> rows;
  rows.reserve(spec.n_values.size());
  for (std::size_t k = 0; k < spec.n_values.size(); ++k) rows.push_back(convergence_point(spec, k));
  return rows;
}

// ---------------------------------------------------------------------------
// Log-log fits used to compare gaps with the rate curves.

struct LogLogFit {
  double slope = kNaN;
  double intercept = kNaN;
  std::size_t points = 0;
};

// Least squares of log y on log x over points with x, y > 0.
inline LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  LogLogFit f;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < std::min(x.size(), y.size()); ++k) {
    if (!(x[k] > 0.0 && y[k] > 0.0)) continue;
    const double lx = std::log(x[k]);
    const double ly = std::log(y[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++f.points;
  }
  if (f.points < 2) return f;
  const double m = static_cast<double>(f.points);
  const double den = m * sxx - sx * sx;
  if (den == 0.0) return f;
  f.slope = (m * sxy - sx * sy) / den;
  f.intercept = (sy - f.slope * sx) / m;
  return f;
}

// Multiplicative constant k minimizing sum (log y - log(k x))^2.
inline double fit_constant(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  std::size_t m = 0;
  for (std::size_t k = 0; k < std::min(x.size(), y.size()); ++k) {
    if (!(x[k] > 0.0 && y[k] > 0.0)) continue;
    s += std::log(y[k] / x[k]);
    ++m;
  }
  return m == 0 ? kNaN : std::exp(s / static_cast<double>(m));
}

// ---------------------------------------------------------------------------
// Assumption checks.

struct AssumptionParams {
  double kappa1 = 1.2;
  double kappa2 = 0.0;
  double gamma = 0.1;
  std::optional<double> beta1;  // defaults to C / n
  double rho = 1.0;
  GridSpec grid{};
};

struct AssumptionCheck {
  std::string name;
  bool passed = false;
  double margin = kNaN;
  std::string detail;
};

struct AssumptionReport {
  std::vector<AssumptionCheck> checks;
  std::optional<EnvelopeReport> envelope;
  std::optional<SmoothnessReport> smoothness;
  std::optional<P1Report> p1;
  bool all_passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
  const AssumptionCheck* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

inline AssumptionReport check_assumptions(const ContentCatalog& catalog, double C, const Envelope& psi,
                                          const AssumptionParams& params = {}) {
  AssumptionReport rep;
  const double n = static_cast<double>(catalog.size());
  const auto families = catalog.scale_families();
  const double m = psi.mean();

  try {
    rep.envelope = check_envelope(families, psi, params.grid);
    rep.checks.push_back({"envelope", rep.envelope->holds, rep.envelope->min_margin,
                          "m_psi=" + std::to_string(rep.envelope->m_psi)});
  } catch (const std::exception& e) {
    rep.checks.push_back({"envelope", false, kNaN, e.what()});
  }

  const double beta1 = params.beta1.value_or(C / n);
  {
    AssumptionCheck c{"C1", false, std::min(beta1 * n - C, m - beta1), ""};
    c.passed = C <= beta1 * n * (1.0 + 1e-12) && beta1 < m && C > 0.0;
    c.detail = "beta1=" + std::to_string(beta1) + " m_psi=" + std::to_string(m);
    rep.checks.push_back(c);
  }

  try {
    rep.smoothness = check_smoothness(families, params.rho);
    AssumptionCheck c{"R6", std::isfinite(rep.smoothness->B), rep.smoothness->B, ""};
    c.detail = "B=" + std::to_string(rep.smoothness->B) + " B0=" + std::to_string(rep.smoothness->B0);
    if (rep.smoothness->uniform_lipschitz_M) c.detail += " M=" + std::to_string(*rep.smoothness->uniform_lipschitz_M);
    rep.checks.push_back(c);
  } catch (const std::exception& e) {
    rep.checks.push_back({"R6", false, kNaN, e.what()});
  }

  try {
    rep.p1 = check_P1(catalog, C, params.kappa1, params.kappa2, params.gamma);
    rep.checks.push_back({"P1", rep.p1->holds, rep.p1->lhs - rep.p1->rhs,
                          "lhs=" + std::to_string(rep.p1->lhs) + " rhs=" + std::to_string(rep.p1->rhs)});
  } catch (const std::exception& e) {
    rep.checks.push_back({"P1", false, kNaN, e.what()});
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Output.

namespace detail {

inline std::string format_number(double v) {
  if (!std::isfinite(v)) return "";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::vector<std::string> row_fields(const ConvergenceRow& r) {
  return {std::to_string(r.n),          format_number(r.C_n),         format_number(r.T_n),
          format_number(r.gap_max),     format_number(r.gap_aggregate), format_number(r.stderr_max),
          format_number(r.stderr_agg),  format_number(r.fagin_limit), format_number(r.curve_quartic),
          format_number(r.curve_sqrt),  csv_quote(r.status),          std::to_string(r.measured_contents),
          std::to_string(r.excluded_contents), std::to_string(r.min_requests), format_number(r.hit_lru),
          format_number(r.hit_ttl),     format_number(r.gap_max_plain), format_number(r.stderr_max_plain),
          format_number(r.gap_aggregate_plain), format_number(r.stderr_agg_plain)};
}

inline nlohmann::json json_number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

inline double json_double(const nlohmann::json& j) { return j.is_null() ? kNaN : j.get<double>(); }

// Splits RFC-4180 text into records of fields.
inline std::vector<std::vector<std::string>> parse_csv_records(const std::string& text) {
  std::vector<std::vector<std::string>> recs;
  std::vector<std::string> rec;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t k = 0; k < text.size(); ++k) {
    const char c = text[k];
    if (quoted) {
      if (c == '"') {
        if (k + 1 < text.size() && text[k + 1] == '"') {
          field += '"';
          ++k;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      rec.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && k + 1 < text.size() && text[k + 1] == '\n') ++k;
      if (any || !field.empty()) {
        rec.push_back(std::move(field));
        recs.push_back(std::move(rec));
      }
      rec.clear();
      field.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (any || !field.empty()) {
    rec.push_back(std::move(field));
    recs.push_back(std::move(rec));
  }
  return recs;
}

inline double parse_number(const std::string& s) { return s.empty() ? kNaN : std::stod(s); }

}  // namespace detail

inline std::string to_csv(const std::vector<ConvergenceRow>& rows) {
  std::string out;
  const auto& cols = convergence_columns();
  for (std::size_t k = 0; k < cols.size(); ++k) out += (k ? "," : "") + cols[k];
  out += "\r\n";
  for (const auto& r : rows) {
    const auto f = detail::row_fields(r);
    for (std::size_t k = 0; k < f.size(); ++k) out += (k ? "," : "") + f[k];
    out += "\r\n";
  }
  return out;
}

inline nlohmann::json to_json(const ConvergenceRow& r) {
  using detail::json_number;
  return nlohmann::json{{"n", r.n},
                        {"C_n", json_number(r.C_n)},
                        {"T_n", json_number(r.T_n)},
                        {"gap_max", json_number(r.gap_max)},
                        {"gap_aggregate", json_number(r.gap_aggregate)},
                        {"stderr_max", json_number(r.stderr_max)},
                        {"stderr_agg", json_number(r.stderr_agg)},
                        {"fagin_limit", json_number(r.fagin_limit)},
                        {"curve_quartic", json_number(r.curve_quartic)},
                        {"curve_sqrt", json_number(r.curve_sqrt)},
                        {"status", r.status},
                        {"measured_contents", r.measured_contents},
                        {"excluded_contents", r.excluded_contents},
                        {"min_requests", r.min_requests},
                        {"hit_lru", json_number(r.hit_lru)},
                        {"hit_ttl", json_number(r.hit_ttl)},
                        {"gap_max_plain", json_number(r.gap_max_plain)},
                        {"stderr_max_plain", json_number(r.stderr_max_plain)},
                        {"gap_aggregate_plain", json_number(r.gap_aggregate_plain)},
                        {"stderr_agg_plain", json_number(r.stderr_agg_plain)}};
}

// Array of row objects with fields in column order.
inline std::string to_json_text(const std::vector<ConvergenceRow>& rows) {
  std::string out = "[";
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto j = to_json(rows[k]);
    nlohmann::ordered_json o;
    for (const auto& c : convergence_columns()) o[c] = j.at(c);
    out += (k ? ",\n  " : "\n  ") + o.dump();
  }
  out += rows.empty() ? "]\n" : "\n]\n";
  return out;
}

inline std::vector<ConvergenceRow> parse_convergence_csv(const std::string& text) {
  const auto recs = detail::parse_csv_records(text);
  if (recs.empty()) throw ConfigError("CSV has no header");
  if (recs.front() != convergence_columns()) throw ConfigError("CSV header does not match the convergence columns");
  std::vector<ConvergenceRow> rows;
  for (std::size_t k = 1; k < recs.size(); ++k) {
    const auto& f = recs[k];
    if (f.size() != convergence_columns().size()) throw ConfigError("CSV record has the wrong number of fields");
    using detail::parse_number;
    ConvergenceRow r;
    r.n = std::stoull(f[0]);
    r.C_n = parse_number(f[1]);
    r.T_n = parse_number(f[2]);
    r.gap_max = parse_number(f[3]);
    r.gap_aggregate = parse_number(f[4]);
    r.stderr_max = parse_number(f[5]);
    r.stderr_agg = parse_number(f[6]);
    r.fagin_limit = parse_number(f[7]);
    r.curve_quartic = parse_number(f[8]);
    r.curve_sqrt = parse_number(f[9]);
    r.status = f[10];
    r.measured_contents = std::stoull(f[11]);
    r.excluded_contents = std::stoull(f[12]);
    r.min_requests = std::stoull(f[13]);
    r.hit_lru = parse_number(f[14]);
    r.hit_ttl = parse_number(f[15]);
    r.gap_max_plain = parse_number(f[16]);
    r.stderr_max_plain = parse_number(f[17]);
    r.gap_aggregate_plain = parse_number(f[18]);
    r.stderr_agg_plain = parse_number(f[19]);
    rows.push_back(std::move(r));
  }
  return rows;
}

inline std::vector<ConvergenceRow> parse_convergence_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  std::vector<ConvergenceRow> rows;
  for (const auto& o : j) {
    using detail::json_double;
    ConvergenceRow r;
    r.n = o.at("n").get<std::size_t>();
    r.C_n = json_double(o.at("C_n"));
    r.T_n = json_double(o.at("T_n"));
    r.gap_max = json_double(o.at("gap_max"));
    r.gap_aggregate = json_double(o.at("gap_aggregate"));
    r.stderr_max = json_double(o.at("stderr_max"));
    r.stderr_agg = json_double(o.at("stderr_agg"));
    r.fagin_limit = json_double(o.at("fagin_limit"));
    r.curve_quartic = json_double(o.at("curve_quartic"));
    r.curve_sqrt = json_double(o.at("curve_sqrt"));
    r.status = o.at("status").get<std::string>();
    r.measured_contents = o.at("measured_contents").get<std::size_t>();
    r.excluded_contents = o.at("excluded_contents").get<std::size_t>();
    r.min_requests = o.at("min_requests").get<std::uint64_t>();
    r.hit_lru = json_double(o.at("hit_lru"));
    r.hit_ttl = json_double(o.at("hit_ttl"));
    r.gap_max_plain = json_double(o.at("gap_max_plain"));
    r.stderr_max_plain = json_double(o.at("stderr_max_plain"));
    r.gap_aggregate_plain = json_double(o.at("gap_aggregate_plain"));
    r.stderr_agg_plain = json_double(o.at("stderr_agg_plain"));
    rows.push_back(std::move(r));
  }
  return rows;
}

enum class OutputFormat { csv, json };

// Writes the table to `path`; throws when the file cannot be written.
inline void emit(const std::vector<ConvergenceRow>& rows, OutputFormat format, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file: " + path);
  out << (format == OutputFormat::csv ? to_csv(rows) : to_json_text(rows));
  if (!out) throw ConfigError("failed writing output file: " + path);
}

}  // namespace lruttl
