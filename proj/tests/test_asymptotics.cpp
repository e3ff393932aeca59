#include <gtest/gtest.h>

#include <cmath>

#include "lruttl/approx.hpp"
#include "lruttl/asymptotics.hpp"
#include "oracles.hpp"

using namespace lruttl;
using D = InterRequestDistribution;

namespace {

const D kPoisson = D::exponential(1.0);

AsymptoticModel zipf_limit_model(double alpha, double beta0, const D& psi = kPoisson) {
  return AsymptoticModel(PopularityDensity::zipf_limit(alpha), psi.standardized(), beta0);
}

// beta(nu) for f = (1-a) x^-a with Poisson requests, after x = u^(1/(1-a)).
double beta_oracle(double a, double nu, std::size_t N) {
  const double q = a / (1.0 - a), jac = 1.0 / (1.0 - a), c = 1.0 - a;
  return oracle::midpoint(
      [&](double u) {
        const double w = std::pow(u, q);
        return -std::expm1(-nu * c / w) * w * jac;
      },
      0.0, 1.0, N);
}

// int f(x) (1 - exp(-nu f(x))) dx under the same substitution.
double hit_oracle(double a, double nu, std::size_t N) {
  const double q = a / (1.0 - a), c = 1.0 - a;
  return c / (1.0 - a) * oracle::midpoint([&](double u) { return -std::expm1(-nu * c / std::pow(u, q)); }, 0.0, 1.0, N);
}

}  // namespace

TEST(Beta, ZeroAtZero) { EXPECT_EQ(beta_fn(zipf_limit_model(0.8, 0.3), 0.0), 0.0); }

TEST(Beta, UniformPoissonAtLn2) {
  EXPECT_NEAR(beta_fn(AsymptoticModel(PopularityDensity::constant(1.0), kPoisson, 0.5), std::log(2.0)), 0.5, 1e-15);
}

TEST(Beta, ZipfLimitMatchesMidpointOracle) {
  EXPECT_NEAR(beta_fn(zipf_limit_model(0.8, 0.3), 1.0), beta_oracle(0.8, 1.0, 10000000), 1e-7);
}

TEST(Beta, NondecreasingBelowOne) {
  for (double a : {0.0, 0.4, 0.8, 0.95}) {
    const auto m = zipf_limit_model(a, 0.3, D::gamma(0.5, 1.0));
    double prev = 0.0;
    for (int k = -30; k <= 30; ++k) {
      const double b = beta_fn(m, std::pow(1.5, k));
      ASSERT_GE(b, prev);
      ASSERT_LE(b, 1.0);
      if (k <= 10) {
        ASSERT_LT(b, 1.0);  // beyond this beta is within rounding of 1
        ASSERT_GT(b, prev) << "a=" << a << " k=" << k;
      }
      prev = b;
    }
  }
}

TEST(Nu0, UniformPoissonIsLn2) {
  const auto r = solve_nu0(AsymptoticModel(PopularityDensity::constant(1.0), kPoisson, 0.5));
  EXPECT_NEAR(r.nu0, std::log(2.0), 1e-10);
  EXPECT_LE(r.residual, 1e-9);
  EXPECT_LE(r.lo, r.nu0);
  EXPECT_GE(r.hi, r.nu0);
}

TEST(Nu0, TwoIdenticalClassesCollapse) {
  const auto f = PopularityDensity::zipf_limit(0.8);
  const auto psi = D::gamma(2.0, 2.0);
  const AsymptoticModel one(f, psi, 0.3);
  const AsymptoticModel two({{0.5, f, psi}, {0.5, f, psi}}, 0.3);
  EXPECT_EQ(solve_nu0(one).nu0, solve_nu0(two).nu0);
  EXPECT_EQ(hit_limit(one).value, hit_limit(two).value);
  const auto h2 = hit_limit(two);
  EXPECT_EQ(h2.per_class[0], h2.per_class[1]);
}

TEST(Nu0, ZipfLimitMatchesBisectionOracle) {
  const double nu_oracle =
      oracle::bisection([](double nu) { return beta_oracle(0.8, nu, 1000000); }, 0.3, 0.0, 16.0, 60);
  const auto r = solve_nu0(zipf_limit_model(0.8, 0.3));
  EXPECT_NEAR(r.nu0, nu_oracle, 1e-7);
  EXPECT_NEAR(beta_fn(zipf_limit_model(0.8, 0.3), r.nu0), 0.3, 1e-9);
}

TEST(Nu0, RoundTripOnGrid) {
  for (double a : {0.0, 0.3, 0.6, 0.9}) {
    for (double b0 : {0.01, 0.2, 0.5, 0.8, 0.99}) {
      const auto m = zipf_limit_model(a, b0, D::weibull(0.7, 1.0));
      EXPECT_NEAR(beta_fn(m, solve_nu0(m).nu0), b0, 1e-9) << a << " " << b0;
    }
  }
}

TEST(Nu0, DomainErrors) {
  EXPECT_THROW(solve_nu0(zipf_limit_model(0.8, 1.0)), ConfigError);
  EXPECT_THROW(solve_nu0(zipf_limit_model(0.8, 0.0)), ConfigError);
}

TEST(Model, ValidationErrors) {
  EXPECT_THROW(AsymptoticModel(PopularityDensity::constant(2.0), kPoisson, 0.5), ConfigError);
  EXPECT_THROW(AsymptoticModel(PopularityDensity::constant(1.0), D::exponential(2.0), 0.5), ConfigError);
  EXPECT_THROW(AsymptoticModel(PopularityDensity::tabulated({2.0, 0.0}), kPoisson, 0.5), ConfigError);
  EXPECT_THROW(AsymptoticModel({{0.5, PopularityDensity::constant(1.0), kPoisson}}, 0.5), ConfigError);
}

TEST(HitLimit, UniformPoissonIsHalf) {
  EXPECT_NEAR(hit_limit(AsymptoticModel(PopularityDensity::constant(1.0), kPoisson, 0.5)).value, 0.5, 1e-10);
}

TEST(HitLimit, AtLeastBeta0ForPoisson) {
  for (double a : {0.0, 0.2, 0.5, 0.8, 0.9}) {
    for (double b0 : {0.05, 0.3, 0.6, 0.9}) {
      EXPECT_GE(hit_limit(zipf_limit_model(a, b0)).value, b0 - 1e-10) << a << " " << b0;
    }
  }
}

TEST(HitLimit, ZipfLimitMatchesMidpointOracle) {
  const auto m = zipf_limit_model(0.8, 0.3);
  const double nu0 = solve_nu0(m).nu0;
  EXPECT_NEAR(hit_limit(m, nu0).value, hit_oracle(0.8, nu0, 10000000), 1e-6);
}

TEST(HitLimit, DegenerateUniformModelClosedForm) {
  for (const D& psi : {D::gamma(0.5, 0.5), D::weibull(2.0, 1.0), D::hyperexponential({0.5, 0.5}, {0.6, 3.0}),
                       D::pareto_lomax(3.0, 1.0)}) {
    const auto s = psi.standardized();
    for (double b0 : {0.1, 0.5, 0.9}) {
      const AsymptoticModel m(PopularityDensity::constant(1.0), s, b0);
      const double nu0 = solve_nu0(m).nu0;
      EXPECT_NEAR(nu0, s.age_quantile(b0), 1e-9);
      EXPECT_NEAR(beta_fn(m, 0.7), s.age_cdf(0.7), 1e-14);
      EXPECT_NEAR(hit_limit(m).value, s.cdf(s.age_quantile(b0)), 1e-9);
    }
  }
}

TEST(HitLimit, TabulatedDensityUsesCellMidpoints) {
  // f = 1.5 on (0, 1/2], 0.5 on (1/2, 1].
  const AsymptoticModel m(PopularityDensity::tabulated({1.5, 0.5}), kPoisson, 0.4);
  const double nu = 0.9;
  const double beta = 0.5 * (-std::expm1(-1.5 * nu)) + 0.5 * (-std::expm1(-0.5 * nu));
  EXPECT_NEAR(beta_fn(m, nu), beta, 1e-15);
  const double h = 0.5 * 1.5 * (-std::expm1(-1.5 * nu)) + 0.5 * 0.5 * (-std::expm1(-0.5 * nu));
  EXPECT_NEAR(hit_limit(m, nu).value, h, 1e-15);
}

TEST(TnAsymptotic, IdenticalPoissonIsExact) {
  const AsymptoticModel m(PopularityDensity::constant(1.0), kPoisson, 0.3);
  for (std::size_t n : {100, 1000, 10000}) {
    const auto cat = catalog_from_rates(std::vector<double>(n, 2.0));
    const double T = characteristic_time(cat, 0.3 * n).T;
    EXPECT_NEAR(tn_asymptotic(m, ZipfTableRule{0.0}, n, cat.total_rate()) / T, 1.0, 1e-9);
  }
}

TEST(TnAsymptotic, ZipfRatioApproachesOne) {
  const double alpha = 0.8;
  const auto m = zipf_limit_model(alpha, 0.3);
  double prev_exact = 1.0, prev_table = 1.0;
  for (std::size_t n : {100, 1000, 10000}) {
    std::vector<double> rates(n);
    for (std::size_t i = 0; i < n; ++i) rates[i] = std::pow(static_cast<double>(i + 1), -alpha);
    const auto cat = catalog_from_rates(rates);
    const double T = characteristic_time(cat, 0.3 * n).T;
    const double ge = std::abs(T / tn_asymptotic(m, ZipfExactRule{alpha}, n, cat.total_rate()) - 1.0);
    const double gt = std::abs(T / tn_asymptotic(m, ZipfTableRule{alpha}, n, cat.total_rate()) - 1.0);
    EXPECT_LT(ge, prev_exact);
    EXPECT_LT(gt, prev_table);
    prev_exact = ge;
    prev_table = gt;
  }
  EXPECT_LT(prev_exact, 0.03);
}

TEST(TnAsymptotic, HarmonicRuleUsesNLogN) {
  EXPECT_DOUBLE_EQ(zipf_gn_table(1.0, 1000), 1.0 / (1000.0 * std::log(1000.0)));
  EXPECT_NEAR(zipf_gn_table(1.5, 100), 1.0 / (2.6123753486854883 * 1000.0), 1e-15);
  EXPECT_DOUBLE_EQ(zipf_gn_table(0.5, 100), 0.005);
}

TEST(TnAsymptotic, RuleValidation) {
  const auto m = zipf_limit_model(0.8, 0.3);
  EXPECT_THROW(resolve_gn(m, ZipfTableRule{0.7}, 100), ConfigError);
  EXPECT_THROW(resolve_gn(m, ExplicitRule{0.0}, 100), ConfigError);
  EXPECT_EQ(resolve_gn(m, ExplicitRule{0.25}, 100), 0.25);
  EXPECT_NEAR(resolve_gn(m, ZipfTableRule{0.8}, 100), 0.01, 1e-15);
}

TEST(RateCurve, ClosedForms) {
  EXPECT_NEAR(rate_curve(RateKind::sqrt, std::exp(1.0)), std::sqrt(std::exp(-1.0)), 1e-15);
  EXPECT_NEAR(rate_curve(RateKind::quartic, std::exp(1.0)), std::pow(std::exp(-1.0), 0.25), 1e-15);
  EXPECT_THROW(rate_curve(RateKind::sqrt, 1.0), ConfigError);
}

TEST(RateCurve, DecreasingFromThree) {
  for (auto kind : {RateKind::sqrt, RateKind::quartic}) {
    double prev = rate_curve(kind, 3.0);
    for (double C = 3.5; C < 1e6; C *= 1.3) {
      const double v = rate_curve(kind, C);
      ASSERT_LT(v, prev);
      prev = v;
    }
  }
}
