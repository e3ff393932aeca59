#pragma once

// Popularity density shapes f on (0, 1]. Content i of n gets popularity
// proportional to f((i - 1/2) / n); the same f enters the large-catalog
// limit integrals. Power-law shapes c * x^-alpha are integrated after the
// substitution x = u^(1 / (1 - alpha)), which removes the endpoint
// singularity.

#include <cmath>
#include <cstddef>
#include <variant>
#include <vector>

#include "lruttl/errors.hpp"
#include "lruttl/numeric.hpp"

namespace lruttl {

struct ConstantDensity {
  double c = 1.0;
};

// c * x^-alpha with 0 <= alpha < 1.
struct PowerDensity {
  double c = 1.0;
  double alpha = 0.0;
};

// Piecewise constant: values[k] on cell (k/m, (k+1)/m].
struct TabulatedDensity {
  std::vector<double> values;
};

class PopularityDensity {
 public:
  using Shape = std::variant<ConstantDensity, PowerDensity, TabulatedDensity>;

  PopularityDensity() : PopularityDensity(ConstantDensity{1.0}) {}
  PopularityDensity(Shape s) : shape_(std::move(s)) { validate(); }  // NOLINT(implicit)

  static PopularityDensity constant(double c) { return {ConstantDensity{c}}; }
  static PopularityDensity power(double c, double alpha) { return {PowerDensity{c, alpha}}; }
  static PopularityDensity tabulated(std::vector<double> v) { return {TabulatedDensity{std::move(v)}}; }

  // Normalized Zipf-limit shape (1 - alpha) x^-alpha.
  static PopularityDensity zipf_limit(double alpha) { return power(1.0 - alpha, alpha); }

  const Shape& shape() const noexcept { return shape_; }

  // False when a tabulated cell is zero, i.e. f vanishes on a set of positive measure.
  bool positive_almost_everywhere() const {
    if (const auto* t = std::get_if<TabulatedDensity>(&shape_)) {
      for (double v : t->values)
        if (v <= 0.0) return false;
    }
    return true;
  }

  double operator()(double x) const {
    if (const auto* k = std::get_if<ConstantDensity>(&shape_)) return k->c;
    if (const auto* p = std::get_if<PowerDensity>(&shape_)) return p->c * std::pow(x, -p->alpha);
    const auto& t = std::get<TabulatedDensity>(shape_).values;
    const double m = static_cast<double>(t.size());
    auto cell = static_cast<std::ptrdiff_t>(std::ceil(x * m)) - 1;
    if (cell < 0) cell = 0;
    if (cell >= static_cast<std::ptrdiff_t>(t.size())) cell = static_cast<std::ptrdiff_t>(t.size()) - 1;
    return t[static_cast<std::size_t>(cell)];
  }

  double integral() const {
    if (const auto* k = std::get_if<ConstantDensity>(&shape_)) return k->c;
    if (const auto* p = std::get_if<PowerDensity>(&shape_)) return p->c / (1.0 - p->alpha);
    const auto& t = std::get<TabulatedDensity>(shape_).values;
    CompensatedSum s;
    for (double v : t) s += v;
    return s.value() / static_cast<double>(t.size());
  }

  // int_0^1 h(f(x)) dx for a bounded h with h(inf) = h_at_infinity.
  template <class H>
  double integrate_of(H&& h, double abs_tol = 1e-12, double h_at_infinity = 1.0) const {
    if (const auto* k = std::get_if<ConstantDensity>(&shape_)) return h(k->c);
    if (const auto* p = std::get_if<PowerDensity>(&shape_)) {
      if (p->alpha == 0.0) return h(p->c);
      const double q = p->alpha / (1.0 - p->alpha);
      const double jac = 1.0 / (1.0 - p->alpha);
      auto g = [&](double u) {
        if (u <= 0.0) return 0.0 * h_at_infinity;
        const double w = std::pow(u, q);
        return h(p->c / w) * w * jac;
      };
      return adaptive_simpson(g, 0.0, 1.0, abs_tol, 200000).value;
    }
    const auto& t = std::get<TabulatedDensity>(shape_).values;
    CompensatedSum s;
    for (double v : t) s += h(v);
    return s.value() / static_cast<double>(t.size());
  }

  // int_0^1 f(x) h(f(x)) dx for a bounded h with h(inf) = h_at_infinity.
  template <class H>
  double integrate_weighted(H&& h, double abs_tol = 1e-12, double h_at_infinity = 1.0) const {
    if (const auto* k = std::get_if<ConstantDensity>(&shape_)) return k->c * h(k->c);
    if (const auto* p = std::get_if<PowerDensity>(&shape_)) {
      if (p->alpha == 0.0) return p->c * h(p->c);
      const double q = p->alpha / (1.0 - p->alpha);
      const double pre = p->c / (1.0 - p->alpha);
      auto g = [&](double u) {
        if (u <= 0.0) return h_at_infinity;
        return h(p->c / std::pow(u, q));
      };
      return pre * adaptive_simpson(g, 0.0, 1.0, abs_tol / pre, 200000).value;
    }
    const auto& t = std::get<TabulatedDensity>(shape_).values;
    CompensatedSum s;
    for (double v : t) s += v * h(v);
    return s.value() / static_cast<double>(t.size());
  }

 private:
  void validate() const {
    if (const auto* k = std::get_if<ConstantDensity>(&shape_)) {
      if (!(k->c > 0.0) || !std::isfinite(k->c)) throw ConfigError("constant density must be positive");
    } else if (const auto* p = std::get_if<PowerDensity>(&shape_)) {
      if (!(p->c > 0.0) || !std::isfinite(p->c)) throw ConfigError("power density coefficient must be positive");
      if (!(p->alpha >= 0.0 && p->alpha < 1.0))
        throw ConfigError("power density exponent must lie in [0, 1); other singularities are unsupported");
    } else {
      const auto& t = std::get<TabulatedDensity>(shape_).values;
      if (t.empty()) throw ConfigError("tabulated density needs at least one value");
      bool any = false;
      for (double v : t) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("tabulated density values must be nonnegative and finite");
        any = any || v > 0.0;
      }
      if (!any) throw ConfigError("tabulated density is identically zero");
    }
  }

  Shape shape_;
};

}  // namespace lruttl
