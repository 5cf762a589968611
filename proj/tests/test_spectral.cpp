#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "tspde/spectral.hpp"

namespace tspde {
namespace {

using std::numbers::pi;
using std::numbers::sqrt2;

TEST(Eigenvalue, FirstModes) {
  EXPECT_NEAR(eigenvalue(1), 9.869604401089358, 1e-12);
  EXPECT_NEAR(eigenvalue(2), 4.0 * pi * pi, 1e-12);
  EXPECT_NEAR(eigenvalue(2), 39.478418, 1e-6);
  EXPECT_DOUBLE_EQ(eigenvalue(3), 9.0 * eigenvalue(1));
  EXPECT_THROW(eigenvalue(0), DomainError);
}

TEST(Eigenvalue, StructureIncreasing) {
  EigenStructure e(32);
  EXPECT_DOUBLE_EQ(e.lambdas[0], pi * pi);
  for (std::size_t n = 1; n < e.modes(); ++n) EXPECT_GT(e.lambdas[n], e.lambdas[n - 1]);
}

TEST(Synthesize, FirstModeOnThreeNodes) {
  const GridField g = synthesize(SpectralField::unit(1, 1), 3);
  ASSERT_EQ(g.nodes(), 3u);
  EXPECT_NEAR(g.values[0], 1.0, 1e-15);
  EXPECT_NEAR(g.values[1], sqrt2, 1e-15);
  EXPECT_NEAR(g.values[2], 1.0, 1e-15);
}

TEST(Synthesize, ZeroFieldGivesZeroGrid) {
  const GridField g = synthesize(SpectralField(8), 32);
  for (double v : g.values) EXPECT_EQ(v, 0.0);
}

TEST(Synthesize, TopModeIsPureSine) {
  for (std::size_t M : {16u, 17u, 40u}) {
    const std::size_t J = 16;
    const GridField g = synthesize(SpectralField::unit(J, J), M);
    for (std::size_t k = 1; k <= M; ++k) {
      const double x = static_cast<double>(k) / static_cast<double>(M + 1);
      EXPECT_NEAR(g.values[k - 1], sqrt2 * std::sin(J * pi * x), 1e-13) << "M=" << M << " k=" << k;
    }
  }
}

TEST(Synthesize, MatchesDirectSeries) {
  std::mt19937_64 gen(7);
  for (std::size_t J : {1u, 4u, 7u, 16u, 33u}) {
    for (std::size_t M : {J, 2 * J + 1, 4 * J}) {
      const auto a = test::random_coeffs(J, gen);
      const GridField g = synthesize(SpectralField(a), M);
      for (std::size_t k = 1; k <= M; ++k)
        EXPECT_NEAR(g.values[k - 1], test::eval_series(a, node_position(k, M)), 1e-12) << J << " " << M;
    }
  }
}

TEST(Synthesize, RejectsTooFewNodes) {
  EXPECT_THROW(synthesize(SpectralField(8), 7), ConfigError);
  EXPECT_THROW(SineTransform(8, 4), ConfigError);
}

TEST(Analyze, InvertsSynthesis) {
  std::mt19937_64 gen(11);
  for (std::size_t J : {1u, 4u, 7u, 16u, 64u}) {
    for (std::size_t M : {J, J + 1, 4 * J, 4 * J + 1}) {
      const SpectralField a(test::random_coeffs(J, gen));
      const SpectralField b = analyze(synthesize(a, M), J);
      for (std::size_t n = 0; n < J; ++n) EXPECT_NEAR(b[n], a[n], 1e-12) << "J=" << J << " M=" << M;
    }
  }
}

TEST(Analyze, ZeroGridGivesZeroField) {
  const SpectralField f = analyze(GridField(20), 5);
  for (double v : f.coeffs) EXPECT_EQ(v, 0.0);
}

TEST(Analyze, SampledFirstModeOnFifteenNodes) {
  GridField g(15);
  for (std::size_t k = 1; k <= 15; ++k) g.values[k - 1] = sqrt2 * std::sin(pi * node_position(k, 15));
  const SpectralField f = analyze(g, 4);
  EXPECT_NEAR(f[0], 1.0, 1e-12);
  for (std::size_t n = 1; n < 4; ++n) EXPECT_NEAR(f[n], 0.0, 1e-12);
}

TEST(Analyze, MatchesDirectQuadratureSum) {
  std::mt19937_64 gen(3);
  const std::size_t M = 23, J = 9;
  GridField g(test::random_coeffs(M, gen));
  const SpectralField f = analyze(g, J);
  for (std::size_t n = 1; n <= J; ++n) {
    double s = 0.0;
    for (std::size_t k = 1; k <= M; ++k) s += g.values[k - 1] * sqrt2 * std::sin(n * pi * k / (M + 1.0));
    EXPECT_NEAR(f[n - 1], s / (M + 1.0), 1e-13);
  }
}

TEST(Analyze, RejectsTooManyModes) { EXPECT_THROW(analyze(GridField(4), 5), ConfigError); }

TEST(Semigroup, IdentityAtZero) {
  const SpectralField a({0.3, -1.2, 2.0});
  EXPECT_EQ(apply_semigroup(a, 0.0), a);
}

TEST(Semigroup, FirstModeFactor) {
  const SpectralField r = apply_semigroup(SpectralField::unit(2, 1), 0.01);
  EXPECT_NEAR(r[0], std::exp(-pi * pi / 100.0), 1e-15);
  EXPECT_NEAR(r[0], 0.9060180, 1e-7);
}

TEST(Semigroup, SpectralGapBound) {
  std::mt19937_64 gen(5);
  const SpectralField a(test::random_coeffs(12, gen));
  for (double t : {1e-4, 0.01, 0.3}) {
    EXPECT_LT(l2_norm(apply_semigroup(a, t)), std::exp(-eigenvalue(1) * t) * l2_norm(a));
    const SpectralField e1 = SpectralField::unit(12, 1, 2.5);
    EXPECT_NEAR(l2_norm(apply_semigroup(e1, t)), std::exp(-eigenvalue(1) * t) * 2.5, 1e-15);
  }
}

TEST(Semigroup, GroupProperty) {
  std::mt19937_64 gen(9);
  const SpectralField a(test::random_coeffs(20, gen));
  const SpectralField two = apply_semigroup(apply_semigroup(a, 0.013), 0.021);
  const SpectralField one = apply_semigroup(a, 0.034);
  // exp(-x) carries a relative rounding error of order x * eps
  for (std::size_t n = 0; n < 20; ++n) {
    const double tol = 4 * std::numeric_limits<double>::epsilon() * (1.0 + eigenvalue(n + 1) * 0.034);
    EXPECT_NEAR(two[n], one[n], tol * std::abs(one[n]));
  }
}

TEST(Semigroup, RejectsNegativeTime) { EXPECT_THROW(apply_semigroup(SpectralField(2), -0.1), DomainError); }

TEST(Semigroup, SmoothingBound) {
  // lambda^a e^{-lambda t} min(t,1)^a <= sup_u u^a e^{-u} = (a/e)^a
  for (double a : {0.25, 0.5, 1.0}) {
    const double sup_u = std::pow(a / std::numbers::e, a);
    double worst = 0.0;
    for (std::size_t n = 1; n <= 256; ++n)
      for (double lt = -8.0; lt <= 1.0; lt += 0.05) {
        const double t = std::pow(10.0, lt);
        const double lambda = eigenvalue(n);
        worst = std::max(worst, std::pow(lambda, a) * semigroup_factor(lambda, t) * std::pow(std::min(t, 1.0), a));
      }
    EXPECT_LE(worst, 1.1 * sup_u) << "alpha=" << a;
  }
}

TEST(Semigroup, HolderBound) {
  for (double a : {0.1, 0.25, 0.5, 1.0})
    for (std::size_t n = 1; n <= 64; n *= 2)
      for (double s : {0.0, 1e-3, 0.05})
        for (double t : {1e-4, 2e-3, 0.1, 1.0}) {
          const double lambda = eigenvalue(n);
          const double lhs = std::abs(semigroup_factor(lambda, t) - semigroup_factor(lambda, s));
          EXPECT_LE(lhs, std::pow(std::abs(t - s), a) * std::pow(lambda, a) * (1 + 1e-12));
        }
}

TEST(Phi1, FirstModeFactor) {
  const SpectralField r = apply_phi1(SpectralField::unit(1, 1), 0.01);
  EXPECT_NEAR(r[0], (1.0 - std::exp(-pi * pi * 0.01)) / (pi * pi), 1e-15);
  EXPECT_NEAR(r[0], 0.0095224, 1e-7);
}

TEST(Phi1, SmallArgumentLimit) {
  // (1 - e^{-u})/lambda = dt (1 - u/2 + ...), u = lambda dt
  for (double dt : {1e-3, 1e-8, 1e-10}) {
    const double lambda = 1e-6 / dt;
    const double f = phi1_factor(lambda, dt);
    EXPECT_NEAR(f, dt, 1e-9);
    EXPECT_NEAR(f, dt * (1.0 - 0.5e-6), 1e-12 * dt);
  }
  EXPECT_NEAR(phi1_factor(eigenvalue(1), 1e-9), 1e-9 * (1.0 - 0.5 * eigenvalue(1) * 1e-9), 1e-24);
}

TEST(Phi1, BoundedByStepAndInverseEigenvalue) {
  for (std::size_t n = 1; n <= 128; ++n)
    for (double dt : {1e-6, 1e-3, 0.01, 0.5}) {
      const double lambda = eigenvalue(n);
      EXPECT_LE(phi1_factor(lambda, dt), std::min(dt, 1.0 / lambda));
    }
}

TEST(Phi1, EqualsIntegralOfSemigroup) {
  for (std::size_t n : {1u, 5u, 40u})
    for (double dt : {0.001, 0.02, 0.25}) {
      const double lambda = eigenvalue(n);
      // midpoint rule underestimates by a relative (lambda h)^2 / 24
      const std::size_t panels = 20000;
      const double h = dt / panels;
      double s = 0.0;
      for (std::size_t i = 0; i < panels; ++i) s += std::exp(-lambda * (i + 0.5) * h);
      const double rel = (lambda * h) * (lambda * h) / 24.0;
      EXPECT_NEAR(phi1_factor(lambda, dt), s * h, (1.1 * rel + 1e-12) * s * h);
    }
}

TEST(Phi1, RejectsNonPositiveStep) { EXPECT_THROW(apply_phi1(SpectralField(1), 0.0), DomainError); }

TEST(Fractional, IdentityAndInverse) {
  std::mt19937_64 gen(13);
  const SpectralField a(test::random_coeffs(16, gen));
  EXPECT_EQ(apply_fractional(a, 0.0), a);
  for (double al : {0.25, 0.5, -0.75, 1.0}) {
    const SpectralField b = apply_fractional(apply_fractional(a, al), -al);
    for (std::size_t n = 0; n < 16; ++n) EXPECT_NEAR(b[n], a[n], 1e-13);
  }
}

TEST(Fractional, SecondModeSquareRoot) {
  EXPECT_NEAR(apply_fractional(SpectralField::unit(2, 2), 0.5)[1], 2.0 * pi, 1e-13);
  EXPECT_THROW(apply_fractional(SpectralField(2), 1.5), DomainError);
}

TEST(Norms, Pythagoras) { EXPECT_DOUBLE_EQ(l2_norm(SpectralField({3.0, 4.0})), 5.0); }

TEST(Norms, NodeL2OfFirstMode) {
  const GridField g = synthesize(SpectralField::unit(1, 1), 63);
  EXPECT_NEAR(lp_norm(g, 2.0), 1.0, 1e-10);
}

TEST(Norms, SupAtMidpoint) {
  const GridField g = synthesize(SpectralField::unit(1, 1), 31);
  EXPECT_NEAR(sup_norm(g), sqrt2, 1e-15);
  EXPECT_NEAR(g.values[15], sqrt2, 1e-15);
}

TEST(Norms, ParsevalMatchesNodeQuadrature) {
  std::mt19937_64 gen(17);
  const SpectralField a(test::random_coeffs(10, gen));
  EXPECT_NEAR(lp_norm(synthesize(a, 40), 2.0), l2_norm(a), 1e-13);
}

TEST(Norms, LpGeneralExponent) {
  const GridField g(std::vector<double>{1.0, -2.0, 3.0});
  EXPECT_NEAR(lp_norm(g, 1.0), 6.0 / 4.0, 1e-15);
  EXPECT_NEAR(lp_norm(g, 3.0), std::cbrt(36.0 / 4.0), 1e-14);
  EXPECT_THROW(lp_norm(g, 0.5), DomainError);
  EXPECT_THROW(lp_norm(GridField(), 2.0), ConfigError);
}

}  // namespace
}  // namespace tspde
