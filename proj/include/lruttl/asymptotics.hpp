#pragma once

// Large-catalog limits with C ~ beta0 * n. Class j holds a fraction b_j of
// the contents, popularity shape f_j and unit-mean inter-request cdf Psi_j.
//
//   beta(nu)  = sum_j b_j int_0^1 Psihat_j(nu f_j(x)) dx
//   beta(nu0) = beta0
//   H_limit   = sum_j b_j int_0^1 f_j(x) Psi_j(nu0 f_j(x)) dx
//   T_n       ~ nu0 / (g_n Lambda_n)

#include <boost/math/special_functions/zeta.hpp>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "lruttl/density.hpp"
#include "lruttl/distributions.hpp"
#include "lruttl/errors.hpp"
#include "lruttl/numeric.hpp"

namespace lruttl {

struct ModelClass {
  double weight = 1.0;
  PopularityDensity f;
  InterRequestDistribution psi;
};

class AsymptoticModel {
 public:
  AsymptoticModel(std::vector<ModelClass> classes, double beta0) : classes_(std::move(classes)), beta0_(beta0) {
    if (classes_.empty()) throw ConfigError("asymptotic model needs at least one class");
    CompensatedSum w;
    CompensatedSum mass;
    for (std::size_t j = 0; j < classes_.size(); ++j) {
      const auto& c = classes_[j];
      if (!(c.weight > 0.0)) throw ConfigError("class weights must be positive");
      if (std::abs(c.psi.mean() - 1.0) > 1e-9)
        throw ConfigError("class " + std::to_string(j) + ": psi must have unit mean");
      if (!c.f.positive_almost_everywhere())
        throw ConfigError("class " + std::to_string(j) + ": popularity density must be positive almost everywhere");
      w += c.weight;
      mass += c.weight * c.f.integral();
    }
    if (std::abs(w.value() - 1.0) > 1e-9) throw ConfigError("class weights must sum to 1");
    if (std::abs(mass.value() - 1.0) > 1e-8)
      throw ConfigError("popularity densities are not normalized: sum_j b_j int f_j = " + std::to_string(mass.value()));
  }

  // Single class.
  AsymptoticModel(PopularityDensity f, InterRequestDistribution psi, double beta0)
      : AsymptoticModel({ModelClass{1.0, std::move(f), std::move(psi)}}, beta0) {}

  const std::vector<ModelClass>& classes() const noexcept { return classes_; }
  double beta0() const noexcept { return beta0_; }

 private:
  std::vector<ModelClass> classes_;
  double beta0_;
};

inline double beta_fn(const AsymptoticModel& model, double nu, double abs_tol = 1e-12) {
  if (!(nu >= 0.0)) throw ConfigError("nu must be nonnegative");
  if (nu == 0.0) return 0.0;
  CompensatedSum s;
  for (const auto& c : model.classes()) {
    const auto& psi = c.psi;
    s += c.weight * c.f.integrate_of([&psi, nu](double y) { return psi.age_cdf(nu * y); }, abs_tol, 1.0);
  }
  return std::min(1.0, s.value());  // quadrature rounding can exceed 1 by an ulp
}

struct Nu0Result {
  double nu0 = 0.0;
  double beta_at_nu0 = 0.0;
  double residual = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

// Bisection on the increasing beta, bracket [0, hi] with hi doubling from 1.
inline Nu0Result solve_nu0(const AsymptoticModel& model) {
  const double b0 = model.beta0();
  if (!(b0 > 0.0 && b0 < 1.0)) throw ConfigError("beta0 must lie in (0, 1)");
  auto beta = [&model](double nu) { return beta_fn(model, nu); };
  const double hi = expand_upper_bracket(beta, b0, 1.0);
  const auto r = bisect_increasing(beta, b0, 0.0, hi, 1e-12, 200);
  Nu0Result out;
  out.nu0 = r.x;
  out.beta_at_nu0 = beta(r.x);
  out.residual = std::abs(out.beta_at_nu0 - b0);
  out.lo = r.lo;
  out.hi = r.hi;
  if (out.residual > 1e-9) throw ConvergenceError("nu0 bisection stalled above tolerance", r.lo, r.hi);
  return out;
}

struct HitLimit {
  double value = 0.0;
  double nu0 = 0.0;
  std::vector<double> per_class;  // b_j int f_j Psi_j(nu0 f_j)
};

inline HitLimit hit_limit(const AsymptoticModel& model, double nu0) {
  HitLimit h;
  h.nu0 = nu0;
  CompensatedSum s;
  for (const auto& c : model.classes()) {
    const auto& psi = c.psi;
    const double v =
        c.weight * c.f.integrate_weighted([&psi, nu0](double y) { return psi.cdf(nu0 * y); }, 1e-13, 1.0);
    h.per_class.push_back(v);
    s += v;
  }
  h.value = s.value();
  return h;
}

inline HitLimit hit_limit(const AsymptoticModel& model) { return hit_limit(model, solve_nu0(model).nu0); }

// g_n for Zipf weights i^-alpha against the shape x^-alpha: the closed-form
// asymptotic table, or the exact value n^-alpha / sum_j j^-alpha.
struct ZipfTableRule {
  double alpha = 0.8;
};
struct ZipfExactRule {
  double alpha = 0.8;
};
struct ExplicitRule {
  double g_n = 0.0;
};
using GnRule = std::variant<ZipfTableRule, ZipfExactRule, ExplicitRule>;

inline double zipf_gn_table(double alpha, std::size_t n) {
  if (!(alpha >= 0.0)) throw ConfigError("zipf exponent must be >= 0");
  if (n < 2) throw ConfigError("g_n table needs n >= 2");
  const double nn = static_cast<double>(n);
  if (alpha < 1.0) return (1.0 - alpha) / nn;
  if (alpha == 1.0) return 1.0 / (nn * std::log(nn));
  return 1.0 / (boost::math::zeta(alpha) * std::pow(nn, alpha));
}

inline double zipf_gn_exact(double alpha, std::size_t n) {
  if (n == 0) throw ConfigError("catalog size must be at least 1");
  CompensatedSum s;
  for (std::size_t k = n; k >= 1; --k) s += std::pow(static_cast<double>(k), -alpha);
  return std::pow(static_cast<double>(n), -alpha) / s.value();
}

// g_n matched to the model's shape. Zipf rules are stated for x^-alpha; a
// single-class model with f = c x^-alpha gets g_n / c.
inline double resolve_gn(const AsymptoticModel& model, const GnRule& rule, std::size_t n) {
  if (const auto* e = std::get_if<ExplicitRule>(&rule)) {
    if (!(e->g_n > 0.0)) throw ConfigError("explicit g_n must be positive");
    return e->g_n;
  }
  const double alpha = std::holds_alternative<ZipfTableRule>(rule) ? std::get<ZipfTableRule>(rule).alpha
                                                                   : std::get<ZipfExactRule>(rule).alpha;
  const double g = std::holds_alternative<ZipfTableRule>(rule) ? zipf_gn_table(alpha, n) : zipf_gn_exact(alpha, n);
  if (model.classes().size() != 1) throw ConfigError("zipf g_n rules apply to single-class models only");
  const auto& shape = model.classes().front().f.shape();
  double c = 0.0;
  double a = 0.0;
  if (const auto* p = std::get_if<PowerDensity>(&shape)) {
    c = p->c;
    a = p->alpha;
  } else if (const auto* k = std::get_if<ConstantDensity>(&shape)) {
    c = k->c;
  } else {
    throw ConfigError("zipf g_n rules need a constant or power-law density");
  }
  if (std::abs(a - alpha) > 1e-12) throw ConfigError("g_n rule exponent differs from the model density exponent");
  return g / c;
}

inline double tn_asymptotic(double nu0, double g_n, double total_rate) {
  if (!(g_n > 0.0) || !(total_rate > 0.0)) throw ConfigError("g_n and total rate must be positive");
  return nu0 / (g_n * total_rate);
}

inline double tn_asymptotic(const AsymptoticModel& model, const GnRule& rule, std::size_t n, double total_rate) {
  return tn_asymptotic(solve_nu0(model).nu0, resolve_gn(model, rule, n), total_rate);
}

enum class RateKind { quartic, sqrt };

// (log C / C)^(1/4) or (log C / C)^(1/2).
inline double rate_curve(RateKind kind, double C) {
  if (!(C > 1.0)) throw ConfigError("rate curve needs C > 1");
  const double r = std::log(C) / C;
  return kind == RateKind::quartic ? std::sqrt(std::sqrt(r)) : std::sqrt(r);
}

}  // namespace lruttl
