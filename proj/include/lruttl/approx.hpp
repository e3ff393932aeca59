#pragma once

// TTL approximation of an LRU cache: expected TTL occupancy K(T), its
// derivative, the characteristic time solving K(T) = C, TTL hit
// probabilities and concentration reference curves for tau.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "lruttl/distributions.hpp"
#include "lruttl/errors.hpp"
#include "lruttl/numeric.hpp"
#include "lruttl/popularity.hpp"

namespace lruttl {

// K(T) = sum_i Ghat_i(T).
inline double expected_occupancy(const ContentCatalog& catalog, double T) {
  if (!(T > 0.0)) return 0.0;
  CompensatedSum s;
  for (const auto& d : catalog.dists()) s += d.age_cdf(T);
  return s.value();
}

// K'(T) = sum_i lambda_i (1 - G_i(T)).
inline double occupancy_derivative(const ContentCatalog& catalog, double T) {
  if (!(T > 0.0)) return catalog.total_rate();
  CompensatedSum s;
  for (std::size_t i = 0; i < catalog.size(); ++i) s += catalog.rate(i) * catalog.dist(i).ccdf(T);
  return s.value();
}

// mu(T) = K'(T) / Lambda, the aggregate TTL miss probability.
inline double miss_probability(const ContentCatalog& catalog, double T) {
  return occupancy_derivative(catalog, T) / catalog.total_rate();
}

struct TtlHit {
  std::vector<double> per_content;  // G_i(T)
  double aggregate = 0.0;           // sum_i p_i G_i(T)
};

inline TtlHit ttl_hit(const ContentCatalog& catalog, double T) {
  TtlHit h;
  h.per_content.resize(catalog.size());
  CompensatedSum s;
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    h.per_content[i] = catalog.dist(i).cdf(T);
    s += catalog.popularity(i) * h.per_content[i];
  }
  h.aggregate = s.value();
  return h;
}

struct TnBracket {
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
  double nu0 = 0.0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
};

// lower = (C - n2) / (Lambda P(n2)); upper = nu0 / lambda_(n1) with
// Psihat(nu0) = C / (n1 m_Psi), nu0 taken as the smallest such value.
inline TnBracket tn_bracket(const ContentCatalog& catalog, double C, const Envelope& psi, std::size_t n1,
                            std::size_t n2) {
  const double n = static_cast<double>(catalog.size());
  const double m = psi.mean();
  if (!(C > 0.0)) throw ConfigError("cache size must be positive");
  if (!(C < n * m)) throw ConfigError("cache too large for envelope: need C < n * m_psi");
  if (!(static_cast<double>(n1) > C / m) || n1 > catalog.size())
    throw ConfigError("n1 must lie in (C / m_psi, n]");
  if (static_cast<double>(n2) > C) throw ConfigError("n2 must not exceed the cache size");
  TnBracket b;
  b.n1 = n1;
  b.n2 = n2;
  const double tail = catalog.tail(n2);
  b.lower = tail > 0.0 ? (C - static_cast<double>(n2)) / (catalog.total_rate() * tail) : 0.0;
  b.nu0 = psi.age_quantile(C / (static_cast<double>(n1) * m));
  b.upper = b.nu0 / catalog.sorted_rate(n1);
  return b;
}

// Tightest bracket over all n2 in [0, C] and a small set of n1 candidates.
// The upper end is infinite when C >= n m_Psi.
inline TnBracket best_tn_bracket(const ContentCatalog& catalog, double C, const Envelope& psi) {
  if (!(C > 0.0)) throw ConfigError("cache size must be positive");
  const std::size_t n = catalog.size();
  TnBracket best;
  const auto n2_max = static_cast<std::size_t>(std::min(std::floor(C), static_cast<double>(n)));
  for (std::size_t n2 = 0; n2 <= n2_max; ++n2) {
    const double tail = catalog.tail(n2);
    if (!(tail > 0.0)) break;
    const double lo = (C - static_cast<double>(n2)) / (catalog.total_rate() * tail);
    if (lo > best.lower) {
      best.lower = lo;
      best.n2 = n2;
    }
  }
  const double m = psi.mean();
  if (!(C < static_cast<double>(n) * m)) return best;
  const auto n1_min = static_cast<std::size_t>(std::floor(C / m)) + 1;
  std::vector<std::size_t> cands{n};
  for (double k : {1.0, 1.25, 1.5, 2.0, 3.0, 5.0, 10.0}) {
    const auto c = static_cast<std::size_t>(std::ceil(k * static_cast<double>(n1_min)));
    if (c >= n1_min && c <= n) cands.push_back(c);
  }
  std::sort(cands.begin(), cands.end());
  cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
  for (std::size_t n1 : cands) {
    const double nu0 = psi.age_quantile(C / (static_cast<double>(n1) * m));
    const double up = nu0 / catalog.sorted_rate(n1);
    if (up < best.upper) {
      best.upper = up;
      best.nu0 = nu0;
      best.n1 = n1;
    }
  }
  return best;
}

enum class SolveMethod { bisection, newton_safeguarded };

inline const char* to_string(SolveMethod m) {
  return m == SolveMethod::bisection ? "bisection" : "newton-safeguarded";
}

struct CharacteristicTimeResult {
  double T = 0.0;
  double lower = 0.0;  // analytic bracket
  double upper = std::numeric_limits<double>::infinity();
  bool analytic_upper = false;
  double residual = 0.0;  // |K(T) - C|
  int iterations = 0;
  SolveMethod method = SolveMethod::newton_safeguarded;
};

// Solves K(T) = C. K is concave and increasing, so Newton started at the
// left end of the bracket increases monotonically to the root; steps that
// leave the current bracket fall back to bisection.
inline CharacteristicTimeResult characteristic_time(const ContentCatalog& catalog, double C,
                                                    const std::optional<Envelope>& envelope = std::nullopt) {
  const double n = static_cast<double>(catalog.size());
  if (!(C > 0.0)) throw ConfigError("cache size must be positive");
  if (!(C < n)) throw NumericError("infeasible occupancy: C must be smaller than the catalog size");

  const Envelope psi = envelope ? *envelope : Envelope::pointwise_max(catalog.scale_families());
  const TnBracket br = best_tn_bracket(catalog, C, psi);

  CharacteristicTimeResult r;
  r.lower = br.lower;
  r.upper = br.upper;
  r.analytic_upper = std::isfinite(br.upper);

  auto f = [&](double T) { return expected_occupancy(catalog, T) - C; };
  double lo = br.lower;
  double hi = br.upper;
  if (!r.analytic_upper) {
    hi = expand_upper_bracket([&](double T) { return expected_occupancy(catalog, T); }, C,
                              std::max(2.0 * lo, 1.0 / catalog.total_rate()));
  }
  double flo = f(lo);
  double fhi = f(hi);
  if (flo > 0.0 || fhi < 0.0) throw ConvergenceError("characteristic time bracket does not contain the root", lo, hi);
  if (flo == 0.0) {
    r.T = lo;
    return r;
  }
  if (fhi == 0.0) {
    r.T = hi;
    return r;
  }

  constexpr int kMaxIter = 200;
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  double T = lo;
  double fT = flo;
  bool bisected = false;
  for (int it = 1; it <= kMaxIter; ++it) {
    r.iterations = it;
    const double d = occupancy_derivative(catalog, T);
    double next = (d > 0.0) ? T - fT / d : std::numeric_limits<double>::quiet_NaN();
    if (!(next > lo && next < hi)) {
      next = 0.5 * (lo + hi);
      bisected = true;
    }
    const double step = std::abs(next - T);
    T = next;
    fT = f(T);
    if (fT < 0.0) {
      lo = T;
    } else if (fT > 0.0) {
      hi = T;
    }
    const bool tiny_step = step <= 4.0 * kEps * T;
    const bool tiny_bracket = (hi - lo) <= 1e-12 * hi;
    if (fT == 0.0 || tiny_step || tiny_bracket) {
      r.T = T;
      r.residual = std::abs(fT);
      r.method = bisected ? SolveMethod::bisection : SolveMethod::newton_safeguarded;
      if (r.residual > 1e-9 * C) break;
      return r;
    }
  }
  throw ConvergenceError("characteristic time solver did not converge within 200 iterations", lo, hi);
}

// Kolmogorov's exponential inequality for a sum of independent centered
// variables bounded by b with total variance s2: P[S >= x] bound.
inline double kolmogorov_bound(double x, double s2, double b = 1.0) {
  if (!(x > 0.0)) return 1.0;
  return std::min(1.0, std::exp(-x * x / (4.0 * std::max(s2, b * x))));
}

// Reference curves P[tau > (1+x)T] <= upper(x), P[tau < (1-x)T] <= lower(x)
// for 0 <= x <= min(1, x0), with phi = (1 - kappa2) gamma PsiBar((1+x0) nu0)
// and Psihat(nu0) = beta1 / m_Psi.
struct ConcentrationCurve {
  double phi = 0.0;
  double x0 = 1.0;
  double nu0 = 0.0;
  double C = 0.0;
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  double gamma = 0.0;
  double beta1 = 0.0;

  double x_max() const noexcept { return std::min(1.0, x0); }

  double bound_upper(double x) const {
    check(x);
    const double a = phi * x * C;
    return std::exp(-a * a / (4.0 * (1.0 + x) * C + 4.0));
  }

  double bound_lower(double x) const {
    check(x);
    const double a = phi * x * C;
    if (a < 1.0) return 1.0;
    return std::exp(-(a - 1.0) * (a - 1.0) / (4.0 * C + 4.0));
  }

 private:
  void check(double x) const {
    if (!(x >= 0.0 && x <= x_max())) throw ConfigError("concentration bound needs 0 <= x <= min(1, x0)");
  }
};

inline ConcentrationCurve concentration_curve(double kappa1, double kappa2, double gamma, const Envelope& psi,
                                              double C, double beta1, double x0 = 1.0) {
  if (!(C > 0.0)) throw ConfigError("cache size must be positive");
  if (!(kappa2 >= 0.0 && kappa2 < 1.0)) throw ConfigError("kappa2 must lie in [0, 1)");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
  if (!(x0 > 0.0)) throw ConfigError("x0 must be positive");
  if (!(beta1 > 0.0)) throw ConfigError("beta1 must be positive");
  if (!(beta1 < psi.mean())) throw ConfigError("infeasible concentration parameters: beta1 must be below m_psi");
  ConcentrationCurve c;
  c.nu0 = psi.age_quantile(beta1 / psi.mean());
  if (!(psi.age_cdf((1.0 + x0) * c.nu0) < 1.0))
    throw ConfigError("infeasible concentration parameters: Psihat((1 + x0) nu0) reaches 1");
  c.phi = (1.0 - kappa2) * gamma * psi.ccdf((1.0 + x0) * c.nu0);
  if (!(c.phi > 0.0)) throw ConfigError("infeasible concentration parameters: phi vanishes");
  c.x0 = x0;
  c.C = C;
  c.kappa1 = kappa1;
  c.kappa2 = kappa2;
  c.gamma = gamma;
  c.beta1 = beta1;
  return c;
}

// Kolmogorov bounds on tau evaluated with the catalog's own K instead of the
// phi lower bound: Y(T) = number of contents requested in the last T is a
// sum of independent indicators with mean within 1 of K(T).
struct TauBounds {
  double upper = 1.0;  // P[tau > (1+x)T]
  double lower = 1.0;  // P[tau < (1-x)T]
};

inline TauBounds kolmogorov_tau_bounds(const ContentCatalog& catalog, double T, double C, double x) {
  if (!(x > 0.0 && x < 1.0)) throw ConfigError("x must lie in (0, 1)");
  TauBounds b;
  const double kp = expected_occupancy(catalog, (1.0 + x) * T);
  const double dev_up = kp - C;
  if (dev_up > 0.0) b.upper = kolmogorov_bound(dev_up, kp + 1.0);
  const double km = expected_occupancy(catalog, (1.0 - x) * T);
  const double dev_lo = C - km - 1.0;
  if (dev_lo > 0.0) b.lower = kolmogorov_bound(dev_lo, km + 1.0);
  return b;
}

}  // namespace lruttl
