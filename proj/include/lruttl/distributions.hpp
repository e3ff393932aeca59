#pragma once

// Continuous inter-request time distributions on [0, inf) with finite mean.
// Each family supplies its cdf G, ccdf, density, the integrated-tail ("age")
// cdf  Ghat(t) = lambda * int_0^t (1 - G(z)) dz  with lambda = 1 / mean,
// quantiles and samplers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "lruttl/errors.hpp"
#include "lruttl/numeric.hpp"
#include "lruttl/rng.hpp"

namespace lruttl {

struct Exponential {
  double rate = 1.0;
};
struct Gamma {
  double shape = 1.0;
  double rate = 1.0;
};
struct Weibull {
  double shape = 1.0;
  double scale = 1.0;
};
struct Erlang {
  unsigned stages = 1;
  double rate = 1.0;
};
struct Hyperexponential {
  std::vector<double> weights;
  std::vector<double> rates;
};
// Lomax (Pareto type II): ccdf (1 + t/scale)^(-shape), finite mean needs shape > 1.
struct ParetoLomax {
  double shape = 2.0;
  double scale = 1.0;
};

using DistributionFamily = std::variant<Exponential, Gamma, Weibull, Erlang, Hyperexponential, ParetoLomax>;

namespace detail {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

inline void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(what) + " must be a finite positive real");
}

template <class Rng>
double sample_gamma_unit_rate(double shape, Rng& rng) {
  // Marsaglia-Tsang squeeze; shapes below one are boosted and corrected.
  if (shape < 1.0) {
    const double g = sample_gamma_unit_rate(shape + 1.0, rng);
    return g * std::pow(uniform_open01(rng), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = standard_normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_open01(rng);
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

}  // namespace detail

class InterRequestDistribution {
 public:
  InterRequestDistribution() : InterRequestDistribution(Exponential{1.0}) {}

  InterRequestDistribution(DistributionFamily family) : family_(std::move(family)) { validate(); }

  static InterRequestDistribution exponential(double rate) { return {Exponential{rate}}; }
  static InterRequestDistribution gamma(double shape, double rate) { return {Gamma{shape, rate}}; }
  static InterRequestDistribution weibull(double shape, double scale) { return {Weibull{shape, scale}}; }
  static InterRequestDistribution erlang(unsigned stages, double rate) { return {Erlang{stages, rate}}; }
  static InterRequestDistribution hyperexponential(std::vector<double> weights, std::vector<double> rates) {
    return {Hyperexponential{std::move(weights), std::move(rates)}};
  }
  static InterRequestDistribution pareto_lomax(double shape, double scale) { return {ParetoLomax{shape, scale}}; }

  const DistributionFamily& family() const noexcept { return family_; }

  std::string family_name() const {
    return std::visit(detail::overloaded{
                          [](const Exponential&) { return std::string("exponential"); },
                          [](const Gamma&) { return std::string("gamma"); },
                          [](const Weibull&) { return std::string("weibull"); },
                          [](const Erlang&) { return std::string("erlang"); },
                          [](const Hyperexponential&) { return std::string("hyperexponential"); },
                          [](const ParetoLomax&) { return std::string("pareto_lomax"); },
                      },
                      family_);
  }

  double mean() const noexcept { return mean_; }

  // Long-run request rate lambda = 1 / mean.
  double rate() const noexcept { return 1.0 / mean_; }

  // G(t); t < 0 returns 0.
  double cdf(double t) const {
    if (!(t > 0.0)) return 0.0;
    return std::visit(detail::overloaded{
                          [t](const Exponential& d) { return -std::expm1(-d.rate * t); },
                          [t](const Gamma& d) { return boost::math::gamma_p(d.shape, d.rate * t); },
                          [t](const Weibull& d) { return -std::expm1(-std::pow(t / d.scale, d.shape)); },
                          [t](const Erlang& d) { return boost::math::gamma_p(static_cast<double>(d.stages), d.rate * t); },
                          [this, t](const Hyperexponential&) { return 1.0 - ccdf(t); },
                          [t](const ParetoLomax& d) { return -std::expm1(-d.shape * std::log1p(t / d.scale)); },
                      },
                      family_);
  }

  double ccdf(double t) const {
    if (!(t > 0.0)) return 1.0;
    return std::visit(detail::overloaded{
                          [t](const Exponential& d) { return std::exp(-d.rate * t); },
                          [t](const Gamma& d) { return boost::math::gamma_q(d.shape, d.rate * t); },
                          [t](const Weibull& d) { return std::exp(-std::pow(t / d.scale, d.shape)); },
                          [t](const Erlang& d) { return boost::math::gamma_q(static_cast<double>(d.stages), d.rate * t); },
                          [t](const Hyperexponential& d) {
                            CompensatedSum s;
                            for (std::size_t k = 0; k < d.rates.size(); ++k) s += d.weights[k] * std::exp(-d.rates[k] * t);
                            return std::clamp(s.value(), 0.0, 1.0);
                          },
                          [t](const ParetoLomax& d) { return std::exp(-d.shape * std::log1p(t / d.scale)); },
                      },
                      family_);
  }

  double density(double t) const {
    if (t < 0.0) return 0.0;
    return std::visit(detail::overloaded{
                          [t](const Exponential& d) { return d.rate * std::exp(-d.rate * t); },
                          [t](const Gamma& d) {
                            if (t == 0.0) return d.shape < 1.0 ? HUGE_VAL : (d.shape == 1.0 ? d.rate : 0.0);
                            return d.rate * boost::math::gamma_p_derivative(d.shape, d.rate * t);
                          },
                          [t](const Weibull& d) {
                            if (t == 0.0) return d.shape < 1.0 ? HUGE_VAL : (d.shape == 1.0 ? 1.0 / d.scale : 0.0);
                            const double z = t / d.scale;
                            return d.shape / d.scale * std::pow(z, d.shape - 1.0) * std::exp(-std::pow(z, d.shape));
                          },
                          [t](const Erlang& d) {
                            if (t == 0.0) return d.stages == 1 ? d.rate : 0.0;
                            return d.rate * boost::math::gamma_p_derivative(static_cast<double>(d.stages), d.rate * t);
                          },
                          [t](const Hyperexponential& d) {
                            CompensatedSum s;
                            for (std::size_t k = 0; k < d.rates.size(); ++k)
                              s += d.weights[k] * d.rates[k] * std::exp(-d.rates[k] * t);
                            return s.value();
                          },
                          [t](const ParetoLomax& d) {
                            return d.shape / d.scale * std::exp(-(d.shape + 1.0) * std::log1p(t / d.scale));
                          },
                      },
                      family_);
  }

  // Supremum of the density, absent when it is unbounded near zero.
  std::optional<double> max_density() const {
    return std::visit(detail::overloaded{
                          [](const Exponential& d) -> std::optional<double> { return d.rate; },
                          [this](const Gamma& d) -> std::optional<double> {
                            if (d.shape < 1.0) return std::nullopt;
                            return density((d.shape - 1.0) / d.rate);
                          },
                          [this](const Weibull& d) -> std::optional<double> {
                            if (d.shape < 1.0) return std::nullopt;
                            return density(d.scale * std::pow((d.shape - 1.0) / d.shape, 1.0 / d.shape));
                          },
                          [this](const Erlang& d) -> std::optional<double> {
                            return density(static_cast<double>(d.stages - 1) / d.rate);
                          },
                          [this](const Hyperexponential&) -> std::optional<double> { return density(0.0); },
                          [](const ParetoLomax& d) -> std::optional<double> { return d.shape / d.scale; },
                      },
                      family_);
  }

  // Age (integrated-tail) cdf, closed form for every supported family.
  double age_cdf(double t) const {
    if (!(t > 0.0)) return 0.0;
    const double v = std::visit(
        detail::overloaded{
            [t](const Exponential& d) { return -std::expm1(-d.rate * t); },
            [t](const Gamma& d) {
              const double x = d.rate * t;
              return x / d.shape * boost::math::gamma_q(d.shape, x) + boost::math::gamma_p(d.shape + 1.0, x);
            },
            [t](const Weibull& d) { return boost::math::gamma_p(1.0 / d.shape, std::pow(t / d.scale, d.shape)); },
            [t](const Erlang& d) {
              const double k = static_cast<double>(d.stages);
              const double x = d.rate * t;
              return x / k * boost::math::gamma_q(k, x) + boost::math::gamma_p(k + 1.0, x);
            },
            [this, t](const Hyperexponential& d) {
              CompensatedSum s;
              for (std::size_t k = 0; k < d.rates.size(); ++k)
                s += d.weights[k] * (-std::expm1(-d.rates[k] * t)) / d.rates[k];
              return s.value() / mean_;
            },
            [t](const ParetoLomax& d) { return -std::expm1(-(d.shape - 1.0) * std::log1p(t / d.scale)); },
        },
        family_);
    return std::clamp(v, 0.0, 1.0);
  }

  // Inverse of cdf; u in [0, 1).
  double quantile(double u) const {
    if (!(u >= 0.0 && u < 1.0)) throw ConfigError("quantile level must lie in [0, 1): unbounded quantile");
    if (u == 0.0) return 0.0;
    return std::visit(detail::overloaded{
                          [u](const Exponential& d) { return -std::log1p(-u) / d.rate; },
                          [u](const Gamma& d) { return boost::math::gamma_p_inv(d.shape, u) / d.rate; },
                          [u](const Weibull& d) { return d.scale * std::pow(-std::log1p(-u), 1.0 / d.shape); },
                          [u](const Erlang& d) { return boost::math::gamma_p_inv(static_cast<double>(d.stages), u) / d.rate; },
                          [this, u](const Hyperexponential&) {
                            auto g = [this](double t) { return cdf(t); };
                            const double hi = expand_upper_bracket(g, u, mean_);
                            return bisect_increasing(g, u, 0.0, hi, 1e-14).x;
                          },
                          [u](const ParetoLomax& d) { return d.scale * std::expm1(-std::log1p(-u) / d.shape); },
                      },
                      family_);
  }

  // Inverse of age_cdf; u in [0, 1). Bisection on the monotone age cdf with
  // an upper bracket that doubles from the mean; closed form where available.
  double age_quantile(double u) const {
    if (!(u >= 0.0 && u < 1.0)) throw ConfigError("age quantile level must lie in [0, 1): unbounded quantile");
    if (u == 0.0) return 0.0;
    if (const auto* e = std::get_if<Exponential>(&family_)) return -std::log1p(-u) / e->rate;
    if (const auto* p = std::get_if<ParetoLomax>(&family_)) return p->scale * std::expm1(-std::log1p(-u) / (p->shape - 1.0));
    auto g = [this](double t) { return age_cdf(t); };
    const double hi = expand_upper_bracket(g, u, mean_);
    return bisect_increasing(g, u, 0.0, hi, 1e-13).x;
  }

  template <class Rng>
  double sample(Rng& rng) const {
    return std::visit(detail::overloaded{
                          [&rng](const Exponential& d) { return -std::log(uniform_open01(rng)) / d.rate; },
                          [&rng](const Gamma& d) { return detail::sample_gamma_unit_rate(d.shape, rng) / d.rate; },
                          [&rng](const Weibull& d) {
                            return d.scale * std::pow(-std::log(uniform_open01(rng)), 1.0 / d.shape);
                          },
                          [&rng](const Erlang& d) {
                            if (d.stages > 16) return detail::sample_gamma_unit_rate(static_cast<double>(d.stages), rng) / d.rate;
                            double acc = 0.0;
                            for (unsigned k = 0; k < d.stages; ++k) acc -= std::log(uniform_open01(rng));
                            return acc / d.rate;
                          },
                          [&rng](const Hyperexponential& d) {
                            const double u = uniform01(rng);
                            double c = 0.0;
                            std::size_t k = 0;
                            for (; k + 1 < d.weights.size(); ++k) {
                              c += d.weights[k];
                              if (u < c) break;
                            }
                            return -std::log(uniform_open01(rng)) / d.rates[k];
                          },
                          [&rng](const ParetoLomax& d) {
                            return d.scale * std::expm1(-std::log(uniform_open01(rng)) / d.shape);
                          },
                      },
                      family_);
  }

  // Draws from the age distribution, i.e. the stationary forward (or
  // backward) recurrence time.
  template <class Rng>
  double sample_age(Rng& rng) const {
    return age_quantile(uniform01(rng));
  }

  // Same shape, rescaled to the given mean.
  InterRequestDistribution with_mean(double m) const {
    detail::require_positive(m, "mean");
    const double f = mean_ / m;  // multiply rates by f, divide scales by f
    return std::visit(detail::overloaded{
                          [f](const Exponential& d) { return InterRequestDistribution(Exponential{d.rate * f}); },
                          [f](const Gamma& d) { return InterRequestDistribution(Gamma{d.shape, d.rate * f}); },
                          [f](const Weibull& d) { return InterRequestDistribution(Weibull{d.shape, d.scale / f}); },
                          [f](const Erlang& d) { return InterRequestDistribution(Erlang{d.stages, d.rate * f}); },
                          [f](const Hyperexponential& d) {
                            Hyperexponential h = d;
                            for (double& r : h.rates) r *= f;
                            return InterRequestDistribution(std::move(h));
                          },
                          [f](const ParetoLomax& d) { return InterRequestDistribution(ParetoLomax{d.shape, d.scale / f}); },
                      },
                      family_);
  }

  // Unit-mean version: G*(t) = G(t / lambda).
  InterRequestDistribution standardized() const { return with_mean(1.0); }

  // True when both belong to the same scale family (equal standardized cdfs).
  bool same_scale_family(const InterRequestDistribution& other, double tol = 1e-12) const {
    if (family_.index() != other.family_.index()) return false;
    auto close = [tol](double a, double b) { return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b)); };
    const auto a = standardized();
    const auto b = other.standardized();
    return std::visit(
        detail::overloaded{
            [&](const Exponential&) { return true; },
            [&](const Gamma& x) { return close(x.shape, std::get<Gamma>(b.family_).shape); },
            [&](const Weibull& x) { return close(x.shape, std::get<Weibull>(b.family_).shape); },
            [&](const Erlang& x) { return x.stages == std::get<Erlang>(b.family_).stages; },
            [&](const Hyperexponential& x) {
              const auto& y = std::get<Hyperexponential>(b.family_);
              if (x.rates.size() != y.rates.size()) return false;
              for (std::size_t k = 0; k < x.rates.size(); ++k)
                if (!close(x.rates[k], y.rates[k]) || !close(x.weights[k], y.weights[k])) return false;
              return true;
            },
            [&](const ParetoLomax& x) { return close(x.shape, std::get<ParetoLomax>(b.family_).shape); },
        },
        a.family_);
  }

 private:
  void validate() {
    mean_ = std::visit(
        detail::overloaded{
            [](const Exponential& d) {
              detail::require_positive(d.rate, "exponential rate");
              return 1.0 / d.rate;
            },
            [](const Gamma& d) {
              detail::require_positive(d.shape, "gamma shape");
              detail::require_positive(d.rate, "gamma rate");
              return d.shape / d.rate;
            },
            [](const Weibull& d) {
              detail::require_positive(d.shape, "weibull shape");
              detail::require_positive(d.scale, "weibull scale");
              return d.scale * std::tgamma(1.0 + 1.0 / d.shape);
            },
            [](const Erlang& d) {
              if (d.stages == 0) throw ConfigError("erlang stages must be a positive integer");
              detail::require_positive(d.rate, "erlang rate");
              return static_cast<double>(d.stages) / d.rate;
            },
            [](Hyperexponential& d) {
              if (d.weights.empty() || d.weights.size() != d.rates.size())
                throw ConfigError("hyperexponential needs equally many weights and rates");
              CompensatedSum w;
              for (std::size_t k = 0; k < d.weights.size(); ++k) {
                detail::require_positive(d.weights[k], "hyperexponential weight");
                detail::require_positive(d.rates[k], "hyperexponential rate");
                w += d.weights[k];
              }
              const double total = w.value();
              CompensatedSum m;
              for (std::size_t k = 0; k < d.weights.size(); ++k) {
                d.weights[k] /= total;
                m += d.weights[k] / d.rates[k];
              }
              return m.value();
            },
            [](const ParetoLomax& d) {
              detail::require_positive(d.scale, "pareto_lomax scale");
              if (!(d.shape > 1.0) || !std::isfinite(d.shape))
                throw ConfigError("pareto_lomax shape must exceed 1 for a finite mean");
              return d.scale / (d.shape - 1.0);
            },
        },
        family_);
  }

  DistributionFamily family_;
  double mean_ = 1.0;
};

// Free-function spellings of the core queries.
inline double cdf(const InterRequestDistribution& d, double t) { return d.cdf(t); }
inline double age_cdf(const InterRequestDistribution& d, double t) { return d.age_cdf(t); }
inline double age_quantile(const InterRequestDistribution& d, double u) { return d.age_quantile(u); }
inline InterRequestDistribution standardize(const InterRequestDistribution& d) { return d.standardized(); }

// Numerical age cdf lambda * int_0^t ccdf, for cross-checking closed forms
// and for envelopes that have no closed form.
inline double age_cdf_by_quadrature(const InterRequestDistribution& d, double t, double abs_tol = 1e-10) {
  if (!(t > 0.0)) return 0.0;
  auto r = adaptive_simpson([&d](double z) { return d.ccdf(z); }, 0.0, t, abs_tol * d.mean(), 10000);
  return r.value / d.mean();
}

// ---------------------------------------------------------------------------
// Envelope Psi: a cdf whose ccdf lies below every standardized inter-request
// ccdf. Either a single user-supplied distribution (mean m_Psi <= 1) or the
// pointwise maximum of a finite set of standardized cdfs.

class Envelope {
 public:
  Envelope(InterRequestDistribution psi) : components_{std::move(psi)} {  // NOLINT(implicit)
    mean_ = components_.front().mean();
  }

  static Envelope pointwise_max(const std::vector<InterRequestDistribution>& family) {
    if (family.empty()) throw ConfigError("envelope needs at least one distribution");
    std::vector<InterRequestDistribution> std_family;
    for (const auto& d : family) {
      bool dup = false;
      for (const auto& e : std_family) dup = dup || e.same_scale_family(d);
      if (!dup) std_family.push_back(d.standardized());
    }
    Envelope e(std_family.front());
    e.components_ = std::move(std_family);
    e.mean_ = e.components_.size() == 1 ? e.components_.front().mean() : e.integrate_ccdf_to_infinity();
    return e;
  }

  const std::vector<InterRequestDistribution>& components() const noexcept { return components_; }
  bool is_single() const noexcept { return components_.size() == 1; }

  // m_Psi.
  double mean() const noexcept { return mean_; }

  double cdf(double t) const { return 1.0 - ccdf(t); }

  double ccdf(double t) const {
    if (is_single()) return components_.front().ccdf(t);
    double m = 1.0;
    for (const auto& c : components_) m = std::min(m, c.ccdf(t));
    return m;
  }

  // Psi-hat, the integrated-tail cdf of Psi normalized by m_Psi.
  double age_cdf(double t) const {
    if (is_single()) return components_.front().age_cdf(t);
    if (!(t > 0.0)) return 0.0;
    return std::clamp(integrate_ccdf(0.0, t) / mean_, 0.0, 1.0);
  }

  double age_quantile(double u) const {
    if (is_single()) return components_.front().age_quantile(u);
    if (!(u >= 0.0 && u < 1.0)) throw ConfigError("age quantile level must lie in [0, 1): unbounded quantile");
    if (u == 0.0) return 0.0;
    // Newton on I(t) = int_0^t ccdf from t = 0. I is concave, so the iterates
    // increase to the root; I is accumulated panel by panel.
    const double target = u * mean_;
    double t = 0.0, I = 0.0;
    for (int it = 0; it < 100; ++it) {
      const double slope = ccdf(t);
      if (!(slope > 0.0)) break;
      const double step = (target - I) / slope;
      if (step <= 1e-14 * std::max(t, 1e-300)) return t;
      I += integrate_ccdf(t, t + step);
      t += step;
    }
    auto g = [this](double t) { return age_cdf(t); };
    const double hi = expand_upper_bracket(g, u, mean_);
    return bisect_increasing(g, u, 0.0, hi, 1e-11).x;
  }

 private:
  double integrate_ccdf(double a, double b) const {
    // Geometric panels keep kinks of the pointwise minimum well resolved.
    CompensatedSum s;
    double lo = a;
    double step = 1e-3;
    while (lo < b) {
      const double hi = std::min(b, std::max(lo + step, 2.0 * lo));
      s += adaptive_simpson([this](double z) { return ccdf(z); }, lo, hi, 1e-13, 20000).value;
      lo = hi;
    }
    return s.value();
  }

  double integrate_ccdf_to_infinity() const {
    // The tail beyond L is bounded by min_j int_L^inf ccdf_j = min_j (1 - Ghat_j(L))
    // because every component has unit mean.
    double L = 1.0;
    for (int k = 0; k < 200; ++k) {
      double tail = 1.0;
      for (const auto& c : components_) tail = std::min(tail, 1.0 - c.age_cdf(L));
      if (tail < 1e-13) break;
      L *= 2.0;
    }
    return integrate_ccdf(0.0, L);
  }

  std::vector<InterRequestDistribution> components_;
  double mean_ = 1.0;
};

// ---------------------------------------------------------------------------
// Assumption checks on families of inter-request distributions.

struct GridSpec {
  double lo = 1e-6;
  double hi = 1e3;
  std::size_t points = 1000;
};

inline std::vector<double> log_grid(const GridSpec& g) {
  if (!(g.lo > 0.0 && g.hi > g.lo) || g.points < 2) throw ConfigError("grid needs 0 < lo < hi and >= 2 points");
  std::vector<double> out(g.points);
  const double r = std::log(g.hi / g.lo) / static_cast<double>(g.points - 1);
  for (std::size_t k = 0; k < g.points; ++k) out[k] = g.lo * std::exp(r * static_cast<double>(k));
  out.back() = g.hi;
  return out;
}

struct EnvelopeReport {
  Envelope psi;
  double m_psi = 1.0;
  std::vector<double> grid;
  double min_margin = 0.0;  // min over grid and family of ccdf*(t) - PsiBar(t)
  double argmin_t = 0.0;
  bool holds = false;
};

// Grid surrogate for "ccdf*(t) >= PsiBar(t) for all t".
inline EnvelopeReport check_envelope(const std::vector<InterRequestDistribution>& family, const Envelope& psi,
                                     const GridSpec& grid_spec = {}, double tolerance = 1e-9) {
  if (!(psi.mean() > 0.0 && psi.mean() <= 1.0 + 1e-9))
    throw ConfigError("invalid envelope: mean of psi must lie in (0, 1]");
  EnvelopeReport r{psi, psi.mean(), log_grid(grid_spec), HUGE_VAL, 0.0, false};
  std::vector<InterRequestDistribution> std_family;
  std_family.reserve(family.size());
  for (const auto& d : family) std_family.push_back(d.standardized());
  for (double t : r.grid) {
    const double pb = psi.ccdf(t);
    for (const auto& g : std_family) {
      const double m = g.ccdf(t) - pb;
      if (m < r.min_margin) {
        r.min_margin = m;
        r.argmin_t = t;
      }
    }
  }
  r.holds = r.min_margin >= -tolerance;
  return r;
}

struct SmoothnessReport {
  double B = 0.0;    // sup |G(t) - G(t +- x t)| / x over the grid, x in (0, rho]
  double rho = 1.0;
  double B0 = 0.0;   // sup_t t G'(t) over the standardized family
  std::optional<double> uniform_lipschitz_M;  // sup of densities, absent if unbounded
};

// sup_{t>0} t * g(t) for one distribution: log-grid scan then golden-section refinement.
inline double sup_t_density(const InterRequestDistribution& d) {
  const auto grid = log_grid({1e-8 * d.mean(), 1e4 * d.mean(), 2000});
  std::size_t best = 0;
  double best_v = -1.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double v = grid[k] * d.density(grid[k]);
    if (v > best_v) {
      best_v = v;
      best = k;
    }
  }
  double a = grid[best == 0 ? 0 : best - 1];
  double b = grid[std::min(best + 1, grid.size() - 1)];
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  auto h = [&d](double t) { return t * d.density(t); };
  double c = b - phi * (b - a), e = a + phi * (b - a);
  double hc = h(c), he = h(e);
  for (int it = 0; it < 200 && (b - a) > 1e-14 * b; ++it) {
    if (hc > he) {
      b = e;
      e = c;
      he = hc;
      c = b - phi * (b - a);
      hc = h(c);
    } else {
      a = c;
      c = e;
      hc = he;
      e = a + phi * (b - a);
      he = h(e);
    }
  }
  return std::max({best_v, hc, he});
}

inline SmoothnessReport check_smoothness(const std::vector<InterRequestDistribution>& family, double rho,
                                         const GridSpec& t_grid = {1e-6, 1e3, 400}, std::size_t x_points = 50) {
  if (!(rho > 0.0 && rho <= 1.0)) throw ConfigError("rho must lie in (0, 1]");
  if (family.empty()) throw ConfigError("smoothness check needs at least one distribution");
  SmoothnessReport r;
  r.rho = rho;
  const auto ts = log_grid(t_grid);
  double M = 0.0;
  bool bounded = true;
  for (const auto& raw : family) {
    const auto g = raw.standardized();
    for (double t : ts) {
      const double gt = g.cdf(t);
      for (std::size_t k = 1; k <= x_points; ++k) {
        const double x = rho * static_cast<double>(k) / static_cast<double>(x_points);
        const double up = std::abs(g.cdf(t + x * t) - gt);
        const double dn = std::abs(gt - g.cdf(t - x * t));
        r.B = std::max(r.B, std::max(up, dn) / x);
      }
    }
    r.B0 = std::max(r.B0, sup_t_density(g));
    if (auto m = g.max_density()) {
      M = std::max(M, *m);
    } else {
      bounded = false;
    }
  }
  if (bounded) r.uniform_lipschitz_M = M;
  return r;
}

}  // namespace lruttl
