// lruttl command-line driver.
//
//   lruttl <subcommand> --config <path> [--seed u64] [--out dir]
//          [--format csv|json] [--threads k]
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "lruttl/approx.hpp"
#include "lruttl/asymptotics.hpp"
#include "lruttl/config.hpp"
#include "lruttl/errors.hpp"
#include "lruttl/experiments.hpp"
#include "lruttl/simulator.hpp"

namespace {

using nlohmann::ordered_json;
using namespace lruttl;
namespace cfgp = lruttl::config;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "json";
  std::size_t threads = 1;
  bool per_content = false;
  bool tn_asymptotic = false;
  std::string trace;
};

ordered_json num(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

std::string fmt(double v) { return detail::format_number(v); }

// Writes `text` to <out>/<name>, or to stdout when no output directory is set.
void write_output(const Options& o, const std::string& name, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::error_code ec;
  std::filesystem::create_directories(o.out, ec);
  const auto path = (std::filesystem::path(o.out) / name).string();
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open output file: " + path);
  f << text;
  if (!f) throw ConfigError("failed writing output file: " + path);
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

std::uint64_t seed_of(const Options& o, const nlohmann::json& j) {
  return o.seed.value_or(cfgp::get_or<std::uint64_t>(j, "seed", 1));
}

nlohmann::json catalog_json(const nlohmann::json& j) { return j.contains("catalog") ? j.at("catalog") : j; }

std::string ttl_per_content_csv(const ContentCatalog& cat, const TtlHit& h) {
  std::ostringstream s;
  s << "i,lambda_i,p_i,H_ttl_i\r\n";
  for (std::size_t i = 0; i < cat.size(); ++i)
    s << i + 1 << ',' << fmt(cat.rate(i)) << ',' << fmt(cat.popularity(i)) << ',' << fmt(h.per_content[i]) << "\r\n";
  return s.str();
}

int cmd_solve_ct(const Options& o) {
  const auto j = cfgp::load_file(o.config);
  const auto cat = cfgp::parse_catalog(catalog_json(j));
  const double C = cfgp::parse_cache_size(j, cat.size());
  const auto env = cfgp::parse_envelope(j, cat);
  const auto r = characteristic_time(cat, C, env);
  const auto h = ttl_hit(cat, r.T);
  ordered_json out;
  out["n"] = cat.size();
  out["C"] = C;
  out["T_n"] = r.T;
  out["bracket"] = {{"lower", num(r.lower)}, {"upper", num(r.upper)}, {"analytic_upper", r.analytic_upper}};
  out["residual"] = r.residual;
  out["iterations"] = r.iterations;
  out["method"] = to_string(r.method);
  out["aggregate_ttl_hit"] = h.aggregate;
  write_output(o, "solve_ct.json", dump(out));
  if (o.per_content) write_output(o, "per_content.csv", ttl_per_content_csv(cat, h));
  return 0;
}

int cmd_ttl_hit(const Options& o) {
  const auto j = cfgp::load_file(o.config);
  const auto cat = cfgp::parse_catalog(catalog_json(j));
  double T;
  std::optional<double> C;
  if (j.contains("timer")) {
    T = cfgp::get<double>(j, "timer");
    if (!(T >= 0.0)) throw ConfigError("timer must be nonnegative");
  } else {
    C = cfgp::parse_cache_size(j, cat.size());
    T = characteristic_time(cat, *C, cfgp::parse_envelope(j, cat)).T;
  }
  const auto h = ttl_hit(cat, T);
  ordered_json out;
  out["n"] = cat.size();
  out["T"] = T;
  if (C) out["C"] = *C;
  out["expected_occupancy"] = expected_occupancy(cat, T);
  out["aggregate_hit"] = h.aggregate;
  out["miss_probability"] = miss_probability(cat, T);
  write_output(o, "ttl_hit.json", dump(out));
  if (o.per_content) write_output(o, "per_content.csv", ttl_per_content_csv(cat, h));
  return 0;
}

int cmd_simulate(const Options& o) {
  const auto j = cfgp::load_file(o.config);
  const auto cat = cfgp::parse_catalog(catalog_json(j));
  const double C = cfgp::parse_cache_size(j, cat.size());
  auto cfg = cfgp::parse_simulation(j, cat, C, seed_of(o, j));
  validate(cfg);

  SimulationReport rep;
  if (o.trace.empty()) {
    rep = replicate(cfg, o.threads);
  } else {
    // Replication 0 is traced; the others run untraced and are merged in order.
    std::ofstream tf(o.trace, std::ios::binary);
    if (!tf) throw ConfigError("cannot open trace file: " + o.trace);
    tf << std::setprecision(17) << "time,content,hit\r\n";
    const double warmup_T =
        std::holds_alternative<DefaultWarmup>(cfg.warmup) ? detail::warmup_reference_time(cfg) : 0.0;
    std::vector<ReplicationResult> reps;
    reps.push_back(run_replication(cfg, 0, warmup_T, [&tf](double t, std::size_t i, bool hit, bool) {
      tf << t << ',' << i + 1 << ',' << (hit ? 1 : 0) << "\r\n";
    }));
    for (std::size_t r = 1; r < cfg.replications; ++r) reps.push_back(run_replication(cfg, r, warmup_T));
    rep = merge_replications(reps);
    if (!tf) throw ConfigError("failed writing trace file: " + o.trace);
  }

  ordered_json out;
  out["n"] = cat.size();
  out["seed"] = cfg.seed;
  out["replications"] = rep.replications;
  if (const auto* l = std::get_if<LruPolicy>(&cfg.policy)) {
    out["policy"] = "lru";
    out["capacity"] = l->capacity;
  } else {
    out["policy"] = "ttl";
    out["timer"] = std::get<TtlPolicy>(cfg.policy).timer;
  }
  out["total_requests"] = rep.total_requests;
  out["total_hits"] = rep.total_hits;
  out["aggregate"] = num(rep.aggregate);
  out["aggregate_stderr"] = num(rep.aggregate_stderr);
  out["measured_time"] = rep.elapsed;
  if (std::holds_alternative<LruPolicy>(cfg.policy) && C < static_cast<double>(cat.size())) {
    const double T = characteristic_time(cat, C).T;
    out["ttl_prediction"] = {{"T_n", T}, {"aggregate", ttl_hit(cat, T).aggregate}};
  }
  if (!rep.tau_samples.empty()) {
    const double T = detail::warmup_reference_time(cfg);
    const auto s = summarize_tau(rep.tau_samples, T, 0.1);
    ordered_json q = ordered_json::object();
    for (std::size_t k = 0; k < s.quantile_levels.size(); ++k) {
      std::ostringstream key;
      key << s.quantile_levels[k];
      q[key.str()] = s.quantiles[k];
    }
    out["tau"] = {{"samples", s.samples}, {"T_n", T}, {"quantiles_over_T", q}, {"frac_outside_10pct", s.frac_outside}};
  }
  write_output(o, "simulate.json", dump(out));

  if (o.per_content) {
    std::ostringstream s;
    s << "i,lambda_i,requests,hits,H_hat,stderr\r\n";
    for (std::size_t i = 0; i < cat.size(); ++i)
      s << i + 1 << ',' << fmt(cat.rate(i)) << ',' << rep.requests[i] << ',' << rep.hits[i] << ','
        << fmt(rep.hit_rate[i]) << ',' << fmt(rep.stderr_hit[i]) << "\r\n";
    write_output(o, "per_content.csv", s.str());
  }
  return 0;
}

int cmd_limit(const Options& o) {
  const auto j = cfgp::load_file(o.config);
  const auto model = cfgp::parse_model(j.contains("model") ? j.at("model") : j);
  const auto r = solve_nu0(model);
  const auto h = hit_limit(model, r.nu0);
  ordered_json out;
  out["beta0"] = model.beta0();
  out["nu0"] = r.nu0;
  out["beta_residual"] = r.residual;
  out["hit_limit"] = h.value;
  out["per_class"] = h.per_class;
  if (o.tn_asymptotic) {
    const auto n = cfgp::get<std::size_t>(j, "n");
    const double total_rate = cfgp::get_or<double>(j, "total_rate", static_cast<double>(n));
    if (!j.contains("gn")) throw ConfigError("--tn-asymptotic needs a \"gn\" rule in the config");
    const auto rule = cfgp::parse_gn_rule(j.at("gn"));
    const double g = resolve_gn(model, rule, n);
    out["tn_asymptotic"] = {{"n", n}, {"total_rate", total_rate}, {"g_n", g}, {"T_n", tn_asymptotic(r.nu0, g, total_rate)}};
  }
  write_output(o, "limit.json", dump(out));
  return 0;
}

int cmd_sweep(const Options& o) {
  const auto j = cfgp::load_file(o.config);
  auto spec = cfgp::parse_sweep(j);
  spec.seed = seed_of(o, j);
  spec.threads = o.threads;
  const auto rows = convergence_sweep(spec);
  const bool csv = o.format == "csv";
  const std::string text = csv ? to_csv(rows) : to_json_text(rows);
  write_output(o, csv ? "convergence.csv" : "convergence.json", text);
  for (const auto& r : rows)
    if (!r.status.empty() && r.status != "ok") std::cerr << "n=" << r.n << ": " << r.status << "\n";
  return 0;
}

int cmd_check(const Options& o) {
  const auto j = cfgp::load_file(o.config);
  const auto cat = cfgp::parse_catalog(catalog_json(j));
  const double C = cfgp::parse_cache_size(j, cat.size());
  const auto env = cfgp::parse_envelope(j, cat);
  const auto rep = check_assumptions(cat, C, env, cfgp::parse_assumption_params(j));
  ordered_json out;
  out["n"] = cat.size();
  out["C"] = C;
  out["m_psi"] = env.mean();
  out["all_passed"] = rep.all_passed();
  ordered_json checks = ordered_json::array();
  for (const auto& c : rep.checks)
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"margin", num(c.margin)}, {"detail", c.detail}});
  out["checks"] = checks;
  write_output(o, "assumptions.json", dump(out));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LRU and TTL cache hit-probability toolkit"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON config file")->required();
    sub->add_option("--seed", o.seed, "master seed (overrides the config)");
    sub->add_option("--out", o.out, "output directory (default: stdout)");
    sub->add_option("--format", o.format, "table format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
  };

  auto* solve = app.add_subcommand("solve-ct", "solve the characteristic time T_n");
  add_common(solve);
  solve->add_flag("--per-content", o.per_content, "also emit per-content TTL hit probabilities as CSV");

  auto* ttl = app.add_subcommand("ttl-hit", "TTL hit probabilities for a timer or cache size");
  add_common(ttl);
  ttl->add_flag("--per-content", o.per_content, "also emit per-content CSV");

  auto* sim = app.add_subcommand("simulate", "simulate an LRU or TTL cache");
  add_common(sim);
  sim->add_flag("--per-content", o.per_content, "also emit per-content CSV");
  sim->add_option("--trace", o.trace, "write (time, content, hit) of replication 0 to this CSV file");

  auto* lim = app.add_subcommand("limit", "large-catalog limit of the hit probability");
  add_common(lim);
  lim->add_flag("--tn-asymptotic", o.tn_asymptotic, "add the asymptotic T_n for the config's n and g_n rule");

  auto* sweep = app.add_subcommand("convergence-sweep", "LRU against the TTL approximation over a range of n");
  add_common(sweep);

  auto* check = app.add_subcommand("check-assumptions", "report the modelling assumptions with margins");
  add_common(check);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*solve) return cmd_solve_ct(o);
    if (*ttl) return cmd_ttl_hit(o);
    if (*sim) return cmd_simulate(o);
    if (*lim) return cmd_limit(o);
    if (*sweep) return cmd_sweep(o);
    if (*check) return cmd_check(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
