#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "tspde/nonlinearity.hpp"

namespace tspde {
namespace {

using std::numbers::pi;
using std::numbers::sqrt2;

TEST(Polynomial, HornerAndDerivative) {
  const Polynomial p({1.0, -2.0, 0.0, 3.0});  // 1 - 2z + 3z^3
  EXPECT_DOUBLE_EQ(p(2.0), 1.0 - 4.0 + 24.0);
  EXPECT_EQ(p.degree(), 3u);
  const Polynomial d = p.derivative();
  EXPECT_DOUBLE_EQ(d(2.0), -2.0 + 36.0);
  EXPECT_TRUE(Polynomial(std::vector<double>{}).is_zero());
}

TEST(Builtins, ParametersAndFlags) {
  const Nonlinearity cubic = Nonlinearity::dissipative_cubic(1.0);
  EXPECT_DOUBLE_EQ(cubic.f(2.0), -10.0);
  EXPECT_DOUBLE_EQ(cubic.growth_q, 3.0);
  EXPECT_NEAR(cubic.lambda_F, -1.0, 1e-12);
  ASSERT_TRUE(cubic.gamma_claim.has_value());
  EXPECT_NEAR(*cubic.gamma_claim, 1.0, 1e-12);
  EXPECT_TRUE(cubic.warnings.empty());

  const Nonlinearity ac = Nonlinearity::allen_cahn(1.0);
  EXPECT_NEAR(ac.lambda_F, 1.0, 1e-12);
  EXPECT_FALSE(ac.gamma_claim.has_value());
  ASSERT_EQ(ac.warnings.size(), 1u);
  EXPECT_NE(ac.warnings[0].find("p = q dissipativity unverified"), std::string::npos);

  const Nonlinearity lin = Nonlinearity::linear(2.0);
  EXPECT_DOUBLE_EQ(lin.growth_q, 2.0);
  EXPECT_NEAR(lin.lambda_F, -2.0, 1e-12);
  EXPECT_TRUE(Nonlinearity::linear(0.0).is_zero());
  EXPECT_THROW(Nonlinearity::linear(-1.0), ConfigError);
  EXPECT_THROW(Nonlinearity::dissipative_cubic(0.0), ConfigError);

  const Nonlinearity sq = Nonlinearity::polynomial({0.0, 0.0, 1.0});
  EXPECT_EQ(sq.lambda_F, std::numeric_limits<double>::infinity());
  EXPECT_NE(sq.warnings.at(0).find("lambda_1"), std::string::npos);
}

TEST(Nemytskii, ZeroDrift) {
  std::mt19937_64 gen(1);
  const SpectralField x(test::random_coeffs(8, gen));
  const SpectralField out = apply_nemytskii(x, Nonlinearity::zero(), 32);
  for (double v : out.coeffs) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(drift_norm(x, Nonlinearity::zero(), 32), 0.0);
}

TEST(Nemytskii, LinearDriftIsScaling) {
  std::mt19937_64 gen(2);
  const SpectralField x(test::random_coeffs(16, gen));
  const SpectralField out = apply_nemytskii(x, Nonlinearity::linear(1.0), 64);
  for (std::size_t n = 0; n < 16; ++n) EXPECT_NEAR(out[n], -x[n], 1e-13);
}

TEST(Nemytskii, CubicOfFirstModeAgainstQuadrature) {
  const double a = 1.7;
  const std::size_t J = 8, M = 32;
  const SpectralField out = apply_nemytskii(SpectralField::unit(J, 1, a), Nonlinearity::polynomial({0, 0, 0, -1}), M);
  auto g = [&](double x) { return -std::pow(a * sqrt2 * std::sin(pi * x), 3); };
  for (std::size_t n = 1; n <= J; ++n) EXPECT_NEAR(out[n - 1], test::inner_with_mode(g, n), 1e-10) << n;
  // -(sqrt2 a sin)^3 = -2 sqrt2 a^3 (3 sin - sin 3x)/4 puts a^3/2 on mode 3
  EXPECT_NEAR(out[2], a * a * a / 2.0, 1e-12);
}

TEST(Nemytskii, PolynomialMatchesQuadratureWhenDealiased) {
  std::mt19937_64 gen(4);
  const std::size_t J = 6;
  const Nonlinearity nl = Nonlinearity::dissipative_cubic(0.5);
  const auto a = test::random_coeffs(J, gen);
  const SpectralField out = apply_nemytskii(SpectralField(a), nl, 4 * J);
  auto g = [&](double x) { return nl.f(test::eval_series(a, x)); };
  for (std::size_t n = 1; n <= J; ++n) EXPECT_NEAR(out[n - 1], test::inner_with_mode(g, n, 20000), 1e-8) << n;
}

TEST(Nemytskii, OverflowCarriesStep) {
  const SpectralField x = SpectralField::unit(4, 1, 1e120);
  try {
    apply_nemytskii(x, Nonlinearity::dissipative_cubic(), 16, 42);
    FAIL() << "expected OverflowError";
  } catch (const OverflowError& e) {
    EXPECT_EQ(e.step(), 42u);
  }
}

TEST(DriftNorm, LinearEqualsStateNorm) {
  const SpectralField x({3.0, 0.0, 4.0});
  EXPECT_NEAR(drift_norm(x, Nonlinearity::linear(1.0), 12), 5.0, 1e-10);
}

TEST(DriftNorm, CubicOfFirstMode) {
  // int_0^1 8 sin^6(pi x) dx = 8 * 5/16
  EXPECT_NEAR(drift_norm(SpectralField::unit(4, 1), Nonlinearity::polynomial({0, 0, 0, -1}), 64), std::sqrt(2.5),
              1e-12);
  const double quad =
      test::trapezoid([](double x) { return 8.0 * std::pow(std::sin(pi * x), 6); }, 0.0, 1.0, 10000);
  EXPECT_NEAR(quad, 2.5, 1e-12);
}

TEST(Audit, DissipativeCubic) {
  const AuditReport r = audit_assumptions(Nonlinearity::dissipative_cubic(1.0), -10, 10);
  EXPECT_NEAR(r.sup_fprime, -1.0, 1e-12);
  EXPECT_TRUE(r.all_p_ok);
  EXPECT_TRUE(r.p2_ok);
  EXPECT_NEAR(r.growth_exponent, 3.0, 0.15);
  EXPECT_GT(r.growth_constant, 0.0);
}

TEST(Audit, AllenCahn) {
  const AuditReport r = audit_assumptions(Nonlinearity::allen_cahn(1.0), -10, 10);
  EXPECT_NEAR(r.sup_fprime, 1.0, 1e-12);
  EXPECT_TRUE(r.p2_ok);
  EXPECT_FALSE(r.all_p_ok);
  EXPECT_NE(r.status.find("unverified"), std::string::npos);
}

TEST(Audit, SquareIsUnverified) {
  const AuditReport r = audit_assumptions(Nonlinearity::polynomial({0, 0, 1}), -10, 10);
  EXPECT_NEAR(r.sup_fprime, 20.0, 1e-12);
  EXPECT_FALSE(r.p2_ok);
  EXPECT_FALSE(r.all_p_ok);
  EXPECT_NEAR(r.growth_exponent, 2.0, 0.15);
}

TEST(Audit, FindsInteriorMaximumOffGrid) {
  // f'(z) = -3 (z - 0.123)^2 + 0.5 peaks between samples
  const double c = 0.123;
  const Nonlinearity nl = Nonlinearity::polynomial({0, 0.5 - 3 * c * c, 3 * c, -1});
  const AuditReport r = audit_assumptions(nl, -1, 1, 4);
  EXPECT_NEAR(r.sup_fprime, 0.5, 1e-9);
}

TEST(Audit, WiderRangeNeverRestoresFlags) {
  const Nonlinearity nl = Nonlinearity::polynomial({0, -1, 0.5});  // f' = -1 + z
  bool p2 = true, all = true;
  for (double w : {0.5, 1.0, 5.0, 20.0}) {
    const AuditReport r = audit_assumptions(nl, -w, w, 501);
    EXPECT_FALSE(!p2 && r.p2_ok);
    EXPECT_FALSE(!all && r.all_p_ok);
    p2 = r.p2_ok;
    all = r.all_p_ok;
  }
  EXPECT_FALSE(all);
  EXPECT_FALSE(p2);
}

TEST(Audit, RejectsBadRange) {
  EXPECT_THROW(audit_assumptions(Nonlinearity::zero(), 1, -1), ConfigError);
  EXPECT_THROW(audit_assumptions(Nonlinearity::zero(), -1, std::numeric_limits<double>::infinity()), ConfigError);
}

}  // namespace
}  // namespace tspde
