#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "lruttl/errors.hpp"

namespace lruttl {

// Neumaier's variant of Kahan summation. Used for every sum over a catalog.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  CompensatedSum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }

  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) noexcept {
  CompensatedSum s;
  for (double x : xs) s += x;
  return s.value();
}

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  std::size_t intervals = 0;
};

// Adaptive Simpson on [a, b] with an absolute tolerance. The interval is
// first cut into `initial_panels` pieces so that narrow features away from
// the endpoints are not missed by the first coarse estimate. Throws
// QuadratureError once more than `max_intervals` subdivisions are needed.
template <class F>
QuadratureResult adaptive_simpson(F&& f, double a, double b, double abs_tol = 1e-10,
                                  std::size_t max_intervals = 10000,
                                  std::size_t initial_panels = 16) {
  QuadratureResult out;
  if (!(b > a)) return out;

  struct Panel {
    double a, b, fa, fm, fb, whole, tol;
    int depth;
  };
  constexpr int kMaxDepth = 60;

  std::vector<Panel> stack;
  stack.reserve(128);
  const double h0 = (b - a) / static_cast<double>(initial_panels);
  const double panel_tol = abs_tol / static_cast<double>(initial_panels);
  double prev_f = f(a);
  for (std::size_t k = 0; k < initial_panels; ++k) {
    const double pa = a + h0 * static_cast<double>(k);
    const double pb = (k + 1 == initial_panels) ? b : a + h0 * static_cast<double>(k + 1);
    const double pm = 0.5 * (pa + pb);
    const double fm = f(pm);
    const double fb = f(pb);
    stack.push_back({pa, pb, prev_f, fm, fb, (pb - pa) / 6.0 * (prev_f + 4.0 * fm + fb), panel_tol, 0});
    prev_f = fb;
  }

  CompensatedSum total;
  double err = 0.0;
  std::size_t splits = 0;
  while (!stack.empty()) {
    Panel p = stack.back();
    stack.pop_back();
    const double m = 0.5 * (p.a + p.b);
    const double lm = 0.5 * (p.a + m);
    const double rm = 0.5 * (m + p.b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - p.a) / 6.0 * (p.fa + 4.0 * flm + p.fm);
    const double right = (p.b - m) / 6.0 * (p.fm + 4.0 * frm + p.fb);
    const double delta = left + right - p.whole;
    if (std::abs(delta) <= 15.0 * p.tol || p.depth >= kMaxDepth || (m - p.a) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(m)) {
      total += left + right + delta / 15.0;
      err += std::abs(delta) / 15.0;
      continue;
    }
    if (++splits > max_intervals) {
      throw QuadratureError("adaptive Simpson exceeded its subdivision cap", err + std::abs(delta));
    }
    stack.push_back({p.a, m, p.fa, flm, p.fm, left, 0.5 * p.tol, p.depth + 1});
    stack.push_back({m, p.b, p.fm, frm, p.fb, right, 0.5 * p.tol, p.depth + 1});
  }
  out.value = total.value();
  out.error_estimate = err;
  out.intervals = splits + initial_panels;
  return out;
}

struct BisectionResult {
  double x = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  int iterations = 0;
};

// Finds x in [lo, hi] with g(x) = target for a nondecreasing g by plain
// bisection. Stops when |g(x) - target| <= value_tol or the bracket collapses
// to floating-point resolution.
template <class G>
BisectionResult bisect_increasing(G&& g, double target, double lo, double hi, double value_tol,
                                  int max_iter = 400) {
  BisectionResult r{0.5 * (lo + hi), lo, hi, 0};
  for (int it = 0; it < max_iter; ++it) {
    const double mid = 0.5 * (lo + hi);
    r.iterations = it + 1;
    if (mid <= lo || mid >= hi) {
      r.x = mid;
      break;
    }
    const double v = g(mid);
    if (std::abs(v - target) <= value_tol) {
      r.x = mid;
      r.lo = lo;
      r.hi = hi;
      return r;
    }
    if (v < target) {
      lo = mid;
    } else {
      hi = mid;
    }
    r.x = 0.5 * (lo + hi);
  }
  r.lo = lo;
  r.hi = hi;
  return r;
}

// Grows hi geometrically from `start` until g(hi) >= target.
template <class G>
double expand_upper_bracket(G&& g, double target, double start, double factor = 2.0,
                            int max_doublings = 2000) {
  double hi = start > 0.0 ? start : 1.0;
  for (int k = 0; k < max_doublings; ++k) {
    if (g(hi) >= target) return hi;
    hi *= factor;
    if (!std::isfinite(hi)) break;
  }
  throw ConvergenceError("could not bracket the root from above", start, hi);
}

}  // namespace lruttl
