#include <gtest/gtest.h>

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <vector>

#include "lruttl/distributions.hpp"
#include "lruttl/rng.hpp"
#include "oracles.hpp"

using namespace lruttl;
using D = InterRequestDistribution;

namespace {

std::vector<D> all_families() {
  return {D::exponential(2.0),
          D::gamma(0.5, 0.5),
          D::gamma(2.0, 2.0),
          D::weibull(0.5, 1.3),
          D::weibull(2.5, 0.7),
          D::erlang(3, 1.5),
          D::hyperexponential({0.3, 0.7}, {0.5, 4.0}),
          D::pareto_lomax(3.0, 2.0)};
}

// Variance of each family, for sample-mean standard errors.
double variance(const D& d) {
  return std::visit(detail::overloaded{
                        [](const Exponential& e) { return 1.0 / (e.rate * e.rate); },
                        [](const Gamma& g) { return g.shape / (g.rate * g.rate); },
                        [](const Weibull& w) {
                          const double g1 = std::tgamma(1.0 + 1.0 / w.shape);
                          return w.scale * w.scale * (std::tgamma(1.0 + 2.0 / w.shape) - g1 * g1);
                        },
                        [](const Erlang& e) { return e.stages / (e.rate * e.rate); },
                        [](const Hyperexponential& h) {
                          double m1 = 0, m2 = 0;
                          for (std::size_t k = 0; k < h.rates.size(); ++k) {
                            m1 += h.weights[k] / h.rates[k];
                            m2 += 2.0 * h.weights[k] / (h.rates[k] * h.rates[k]);
                          }
                          return m2 - m1 * m1;
                        },
                        [](const ParetoLomax& p) {
                          const double a = p.shape;
                          return p.scale * p.scale * a / ((a - 1) * (a - 1) * (a - 2));
                        },
                    },
                    d.family());
}

}  // namespace

// ---- cdf ----------------------------------------------------------------

TEST(Cdf, ExponentialAtZero) { EXPECT_EQ(cdf(D::exponential(1.0), 0.0), 0.0); }

TEST(Cdf, ExponentialMedian) { EXPECT_NEAR(cdf(D::exponential(2.0), std::log(2.0) / 2.0), 0.5, 1e-15); }

TEST(Cdf, NegativeTimeIsZero) { EXPECT_EQ(cdf(D::gamma(2.0, 1.0), -1.0), 0.0); }

TEST(Cdf, Gamma22ClosedFormAndQuadrature) {
  const D d = D::gamma(2.0, 2.0);
  const double closed = 1.0 - std::exp(-2.0) * 3.0;
  EXPECT_NEAR(cdf(d, 1.0), closed, 1e-12);
  const double quad = oracle::trapezoid([&](double t) { return d.density(t); }, 0.0, 1.0, 200000);
  EXPECT_NEAR(quad, closed, 1e-10);
}

// ---- age cdf -------------------------------------------------------------

TEST(AgeCdf, ExponentialEqualsCdf) {
  const D d = D::exponential(1.7);
  for (double t : {0.0, 1e-6, 0.01, 0.3, 1.0, 4.0, 30.0}) EXPECT_EQ(age_cdf(d, t), cdf(d, t));
}

TEST(AgeCdf, ZeroAtZero) {
  for (const auto& d : all_families()) EXPECT_EQ(age_cdf(d, 0.0), 0.0) << d.family_name();
}

TEST(AgeCdf, Gamma22MatchesTrapezoidOracle) {
  // Mean 1, so lambda = 1.
  const double oracle_value =
      oracle::trapezoid([](double z) { return std::exp(-2.0 * z) * (1.0 + 2.0 * z); }, 0.0, 1.0, 400000);
  EXPECT_NEAR(age_cdf(D::gamma(2.0, 2.0), 1.0), oracle_value, 1e-9);
}

TEST(AgeCdf, ClosedFormsAgreeWithQuadrature) {
  for (const auto& d : all_families()) {
    for (double u : {0.05, 0.3, 0.6, 0.9, 0.99}) {
      const double t = d.quantile(u);
      EXPECT_NEAR(d.age_cdf(t), age_cdf_by_quadrature(d, t), 1e-9) << d.family_name() << " t=" << t;
    }
  }
}

TEST(AgeCdf, DerivativeMatchesRateTimesCcdf) {
  for (const auto& d : all_families()) {
    for (int k = 1; k <= 100; ++k) {
      const double t = d.quantile(0.005 + 0.985 * k / 100.0);
      const double h = 1e-5 * t;
      const double fd = (d.age_cdf(t + h) - d.age_cdf(t - h)) / (2.0 * h);
      const double exact = d.rate() * d.ccdf(t);
      EXPECT_NEAR(fd / exact, 1.0, 1e-6) << d.family_name() << " t=" << t;
    }
  }
}

// ---- age quantile ---------------------------------------------------------

TEST(AgeQuantile, ExponentialMedian) {
  EXPECT_NEAR(age_quantile(D::exponential(2.0), 0.5), std::log(2.0) / 2.0, 1e-15);
}

TEST(AgeQuantile, ZeroLevel) {
  for (const auto& d : all_families()) EXPECT_EQ(age_quantile(d, 0.0), 0.0);
}

TEST(AgeQuantile, UnitLevelIsRejected) {
  try {
    age_quantile(D::gamma(2.0, 1.0), 1.0);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("unbounded quantile"), std::string::npos);
  }
}

TEST(AgeQuantile, GammaHalfRoundTrip) {
  const D d = D::gamma(0.5, 0.5);
  EXPECT_NEAR(age_cdf(d, age_quantile(d, 0.9)), 0.9, 1e-9);
}

TEST(AgeQuantile, ResidualBelowTolerance) {
  for (const auto& d : all_families()) {
    for (double u : {1e-6, 0.1, 0.5, 0.9, 0.999}) {
      EXPECT_NEAR(d.age_cdf(d.age_quantile(u)), u, 1e-12) << d.family_name();
    }
  }
}

TEST(AgeQuantile, InvertsAgeCdfOnRandomTimes) {
  CounterRng rng(derive_key(11));
  for (const auto& d : all_families()) {
    for (int k = 0; k < 200; ++k) {
      const double t = d.quantile(0.001 + 0.99 * uniform01(rng));
      const double u = d.age_cdf(t);
      EXPECT_NEAR(d.age_quantile(u), t, 1e-8 * std::max(1.0, t)) << d.family_name();
    }
  }
}

// ---- sampling ------------------------------------------------------------

TEST(Sampling, ExponentialMean) {
  const D d = D::exponential(1.0);
  CounterRng rng(derive_key(1));
  double s = 0.0;
  const int N = 1000000;
  for (int k = 0; k < N; ++k) s += d.sample(rng);
  EXPECT_NEAR(s / N, 1.0, 0.004);
}

TEST(Sampling, ExponentialAgeCdfAtOne) {
  const D d = D::exponential(1.0);
  CounterRng rng(derive_key(2));
  const int N = 400000;
  int below = 0;
  for (int k = 0; k < N; ++k) below += d.sample_age(rng) <= 1.0;
  EXPECT_NEAR(static_cast<double>(below) / N, 1.0 - std::exp(-1.0), 0.002);
}

TEST(Sampling, Gamma22AgeMeanMatchesQuadrature) {
  const D d = D::gamma(2.0, 2.0);
  // Age mean int t dGhat = lambda int t ccdf(t) dt.
  const double m1 = d.rate() * oracle::trapezoid([&](double t) { return t * d.ccdf(t); }, 0.0, 60.0, 600000);
  const double m2 = d.rate() * oracle::trapezoid([&](double t) { return t * t * d.ccdf(t); }, 0.0, 60.0, 600000);
  CounterRng rng(derive_key(3));
  const int N = 100000;
  double s = 0.0;
  for (int k = 0; k < N; ++k) s += d.sample_age(rng);
  const double se = std::sqrt((m2 - m1 * m1) / N);
  EXPECT_NEAR(s / N, m1, 3.0 * se);
}

TEST(Sampling, MeanOfEveryFamilyWithinFourStandardErrors) {
  std::uint64_t key = 100;
  for (const auto& d : all_families()) {
    CounterRng rng(derive_key(key++));
    const int N = 1000000;
    double s = 0.0;
    for (int k = 0; k < N; ++k) s += d.sample(rng);
    const double se = std::sqrt(variance(d) / N);
    EXPECT_NEAR(s / N, d.mean(), 4.0 * se) << d.family_name();
  }
}

TEST(Sampling, EmpiricalCdfMatchesCdf) {
  std::uint64_t key = 200;
  for (const auto& d : all_families()) {
    CounterRng rng(derive_key(key++));
    const int N = 100000;
    std::vector<double> xs(N);
    for (auto& x : xs) x = d.sample(rng);
    for (double u : {0.1, 0.5, 0.9}) {
      const double t = d.quantile(u);
      const double frac = static_cast<double>(std::count_if(xs.begin(), xs.end(), [t](double x) { return x <= t; })) / N;
      EXPECT_NEAR(frac, u, 4.0 * std::sqrt(u * (1 - u) / N)) << d.family_name();
    }
  }
}

// ---- standardization -----------------------------------------------------

TEST(Standardize, ExponentialBecomesUnitRate) {
  const auto s = standardize(D::exponential(5.0));
  EXPECT_NEAR(std::get<Exponential>(s.family()).rate, 1.0, 1e-15);
}

TEST(Standardize, GammaKeepsShape) {
  const auto s = standardize(D::gamma(2.0, 6.0));
  EXPECT_EQ(std::get<Gamma>(s.family()).shape, 2.0);
  EXPECT_NEAR(std::get<Gamma>(s.family()).rate, 2.0, 1e-15);
}

TEST(Standardize, WeibullMeanIsOneByQuadrature) {
  const D w = D::weibull(0.5, 3.0);
  const auto s = standardize(w);
  EXPECT_NEAR(std::get<Weibull>(s.family()).scale, 3.0 / w.mean(), 1e-12);
  // mean = int_0^inf ccdf; substitute t = x^2 to tame the slow tail.
  const double m = oracle::trapezoid([&](double x) { return 2.0 * x * s.ccdf(x * x); }, 0.0, 40.0, 2000000);
  EXPECT_NEAR(m, 1.0, 1e-9);
}

TEST(Standardize, EveryFamilyHasUnitMeanNumerically) {
  for (const auto& d : all_families()) {
    const auto s = d.standardized();
    EXPECT_NEAR(s.mean(), 1.0, 1e-12);
    // Integrate the ccdf over u = t / (1 + t) in [0, 1).
    const double m = oracle::trapezoid(
        [&](double u) {
          if (u >= 1.0) return 0.0;
          const double t = u / (1.0 - u);
          return s.ccdf(t) / ((1.0 - u) * (1.0 - u));
        },
        0.0, 1.0, 4000000);
    EXPECT_NEAR(m, 1.0, 1e-6) << d.family_name();
  }
}

TEST(Standardize, ScaledCdfRelation) {
  for (const auto& d : all_families()) {
    const auto s = d.standardized();
    for (double t : {0.01, 0.2, 1.0, 3.0}) EXPECT_NEAR(s.cdf(t), d.cdf(t / d.rate()), 1e-13) << d.family_name();
  }
}

// ---- cdf axioms ----------------------------------------------------------

TEST(CdfAxioms, RandomPointsOnEveryFamily) {
  CounterRng rng(derive_key(5));
  for (const auto& d : all_families()) {
    std::vector<double> ts(1000);
    for (auto& t : ts) t = -std::log(uniform_open01(rng)) * 3.0 * d.mean();
    std::sort(ts.begin(), ts.end());
    double prev = 0.0;
    for (double t : ts) {
      const double g = d.cdf(t);
      ASSERT_GE(g, 0.0);
      ASSERT_LE(g, 1.0);
      ASSERT_GE(g, prev) << d.family_name();
      ASSERT_NEAR(d.ccdf(t), 1.0 - g, 1e-14);
      prev = g;
    }
    EXPECT_NEAR(d.cdf(1e6 * d.mean()), 1.0, 1e-9) << d.family_name();
  }
}

TEST(InvalidParameters, AreRejected) {
  EXPECT_THROW(D::exponential(0.0), ConfigError);
  EXPECT_THROW(D::gamma(-1.0, 1.0), ConfigError);
  EXPECT_THROW(D::weibull(1.0, 0.0), ConfigError);
  EXPECT_THROW(D::erlang(0, 1.0), ConfigError);
  EXPECT_THROW(D::hyperexponential({1.0}, {1.0, 2.0}), ConfigError);
  EXPECT_THROW(D::pareto_lomax(1.0, 1.0), ConfigError);
}

// ---- envelope ------------------------------------------------------------

TEST(Envelope, ExponentialFamilyWithUnitExponential) {
  const auto r = check_envelope({D::exponential(3.0), D::exponential(0.2)}, Envelope(D::exponential(1.0)));
  EXPECT_TRUE(r.holds);
  EXPECT_EQ(r.min_margin, 0.0);
  EXPECT_EQ(r.m_psi, 1.0);
  EXPECT_EQ(r.grid.size(), 1000u);
}

TEST(Envelope, PointwiseMaxOfTwoGammas) {
  const std::vector<D> fam{D::gamma(1.0, 3.0), D::gamma(2.0, 0.5)};
  const auto psi = Envelope::pointwise_max(fam);
  const auto r = check_envelope(fam, psi);
  EXPECT_TRUE(r.holds);
  EXPECT_LT(r.m_psi, 1.0);
  // m_psi = int min(e^-t, e^-2t (1 + 2t)) dt by brute force.
  const double m = oracle::trapezoid(
      [](double t) { return std::min(std::exp(-t), std::exp(-2 * t) * (1 + 2 * t)); }, 0.0, 60.0, 3000000);
  EXPECT_NEAR(r.m_psi, m, 1e-8);
}

TEST(Envelope, GammaEnvelopeFailsForExponentialNearZero) {
  const D psi = D::gamma(2.0, 2.0);
  const auto r = check_envelope({D::exponential(1.0)}, Envelope(psi));
  EXPECT_FALSE(r.holds);
  EXPECT_LT(r.min_margin, 0.0);
  EXPECT_LT(std::exp(-0.01) - psi.ccdf(0.01), 0.0);
}

TEST(Envelope, RejectsEnvelopeWithMeanAboveOne) {
  EXPECT_THROW(check_envelope({D::exponential(1.0)}, Envelope(D::exponential(0.5))), ConfigError);
}

TEST(Envelope, AgeCdfOfMixedEnvelopeIsNormalizedIntegratedTail) {
  const auto psi = Envelope::pointwise_max({D::gamma(1.0, 1.0), D::gamma(2.0, 2.0)});
  for (double t : {0.1, 0.7, 2.0}) {
    const double brute = oracle::trapezoid([&](double z) { return psi.ccdf(z); }, 0.0, t, 400000) / psi.mean();
    EXPECT_NEAR(psi.age_cdf(t), brute, 1e-9);
    EXPECT_NEAR(psi.age_cdf(psi.age_quantile(psi.age_cdf(t))), psi.age_cdf(t), 1e-10);
  }
}

TEST(Envelope, MixedAgeQuantileMatchesBisectionOracle) {
  const auto psi = Envelope::pointwise_max(
      {D::pareto_lomax(2.5, 1.0), D::hyperexponential({0.3, 0.7}, {0.4, 4.0}), D::weibull(2.5, 1.0)});
  for (double u : {1e-6, 0.01, 0.3, 0.7, 0.99, 0.999}) {
    const double ref = oracle::bisection([&](double t) { return psi.age_cdf(t); }, u, 0.0, 1e4, 80);
    EXPECT_NEAR(psi.age_quantile(u), ref, 1e-9 * std::max(1.0, ref)) << u;
  }
}

// ---- smoothness ----------------------------------------------------------

TEST(Smoothness, ExponentialHasBAtMostOne) {
  const auto r = check_smoothness({D::exponential(1.0)}, 1.0);
  EXPECT_LE(r.B, 1.0 + 1e-9);
  EXPECT_GT(r.B, 0.3);
  ASSERT_TRUE(r.uniform_lipschitz_M.has_value());
  EXPECT_NEAR(*r.uniform_lipschitz_M, 1.0, 1e-12);
}

TEST(Smoothness, ExponentialSupTDensityIsInverseE) {
  EXPECT_NEAR(sup_t_density(D::exponential(1.0)), std::exp(-1.0), 1e-12);
  EXPECT_NEAR(check_smoothness({D::exponential(4.0)}, 0.5).B0, std::exp(-1.0), 1e-12);
}

TEST(Smoothness, GammaFamilyB0MatchesClosedForm) {
  std::vector<D> fam;
  double expected = 0.0;
  for (double a : {0.5, 1.0, 1.5, 2.0}) {
    fam.push_back(D::gamma(a, 1.0));
    expected = std::max(expected, std::pow(a, a) * std::exp(-a) / std::tgamma(a));
  }
  const auto r = check_smoothness(fam, 1.0);
  EXPECT_NEAR(r.B0, expected, 1e-10);
  EXPECT_TRUE(std::isfinite(r.B0));
  EXPECT_FALSE(r.uniform_lipschitz_M.has_value());  // shape 0.5 has an unbounded density
}

TEST(Smoothness, LipschitzBoundHoldsOnSamples) {
  const std::vector<D> fam{D::gamma(2.0, 1.0), D::weibull(1.5, 1.0)};
  const auto r = check_smoothness(fam, 0.5);
  CounterRng rng(derive_key(9));
  for (int k = 0; k < 2000; ++k) {
    const auto& g = fam[k % 2].standardized();
    const double t = 5.0 * uniform01(rng) + 1e-3;
    const double x = 0.5 * uniform01(rng);
    EXPECT_LE(std::abs(g.cdf(t) - g.cdf(t + x * t)), r.B * x + 1e-9);
    EXPECT_LE(std::abs(g.cdf(t) - g.cdf(t - x * t)), r.B * x + 1e-9);
  }
}

TEST(Smoothness, RhoOutOfRange) { EXPECT_THROW(check_smoothness({D::exponential(1.0)}, 0.0), ConfigError); }
