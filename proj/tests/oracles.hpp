#pragma once

// Reference computations for the tests. They deliberately avoid the
// library's own quadrature and root finders.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace oracle {

// Composite trapezoid rule with N panels, long double accumulation.
inline double trapezoid(const std::function<double(double)>& f, double a, double b, std::size_t N) {
  const long double h = (static_cast<long double>(b) - a) / N;
  long double s = 0.5L * (f(a) + f(b));
  for (std::size_t k = 1; k < N; ++k) s += f(static_cast<double>(a + h * k));
  return static_cast<double>(s * h);
}

// Composite midpoint rule with N panels, long double accumulation.
inline double midpoint(const std::function<double(double)>& f, double a, double b, std::size_t N) {
  const long double h = (static_cast<long double>(b) - a) / N;
  long double s = 0.0L;
  for (std::size_t k = 0; k < N; ++k) s += f(static_cast<double>(a + h * (k + 0.5L)));
  return static_cast<double>(s * h);
}

// Plain bisection for g(x) = target with g nondecreasing, fixed iteration count.
inline double bisection(const std::function<double(double)>& g, double target, double lo, double hi, int iters) {
  for (int k = 0; k < iters; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (g(mid) < target) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Dense Gaussian elimination with partial pivoting.
inline std::vector<double> solve_linear(std::vector<std::vector<double>> A, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(A[r][c]) > std::abs(A[p][c])) p = r;
    std::swap(A[c], A[p]);
    std::swap(b[c], b[p]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = A[r][c] / A[c][c];
      for (std::size_t k = c; k < n; ++k) A[r][k] -= f * A[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t r = n; r-- > 0;) {
    double s = b[r];
    for (std::size_t k = r + 1; k < n; ++k) s -= A[r][k] * x[k];
    x[r] = s / A[r][r];
  }
  return x;
}

// LRU with capacity 2 over 3 contents under i.i.d. requests with
// probabilities p. States are the ordered pairs (most recent, second most
// recent); the chain is observed at request epochs. Returns per-content hit
// probabilities at request epochs.
inline std::array<double, 3> lru3_markov_chain(const std::array<double, 3>& p) {
  std::vector<std::array<int, 2>> states;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      if (a != b) states.push_back({a, b});
  const std::size_t S = states.size();
  auto index = [&](int a, int b) {
    for (std::size_t k = 0; k < S; ++k)
      if (states[k][0] == a && states[k][1] == b) return k;
    return S;
  };
  std::vector<std::vector<double>> P(S, std::vector<double>(S, 0.0));
  for (std::size_t s = 0; s < S; ++s) {
    const int a = states[s][0];
    for (int r = 0; r < 3; ++r) {
      const std::size_t t = (r == a) ? s : index(r, a);
      P[s][t] += p[r];
    }
  }
  // pi (P - I) = 0 with sum pi = 1: replace the last equation by normalization.
  std::vector<std::vector<double>> A(S, std::vector<double>(S, 0.0));
  std::vector<double> rhs(S, 0.0);
  for (std::size_t i = 0; i < S; ++i)
    for (std::size_t j = 0; j < S; ++j) A[j][i] = P[i][j] - (i == j ? 1.0 : 0.0);
  for (std::size_t i = 0; i < S; ++i) A[S - 1][i] = 1.0;
  rhs[S - 1] = 1.0;
  const auto pi = solve_linear(A, rhs);
  std::array<double, 3> hit{0, 0, 0};
  for (int r = 0; r < 3; ++r) {
    double in_cache = 0.0;
    for (std::size_t s = 0; s < S; ++s)
      if (states[s][0] == r || states[s][1] == r) in_cache += pi[s];
    hit[r] = in_cache;  // the next request is for r with probability p_r, independent of the state
  }
  return hit;
}

// Closed form for the same model: H_i = p_i + sum_{j != i} p_j p_i / (1 - p_j).
inline std::array<double, 3> lru3_closed_form(const std::array<double, 3>& p) {
  std::array<double, 3> h{};
  for (int i = 0; i < 3; ++i) {
    h[i] = p[i];
    for (int j = 0; j < 3; ++j)
      if (j != i) h[i] += p[j] * p[i] / (1.0 - p[j]);
  }
  return h;
}

}  // namespace oracle
