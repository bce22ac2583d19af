#include <gtest/gtest.h>

#include <cmath>

#include "hopflax/cost_functions.hpp"

using namespace hopflax;

namespace {

CostFunction capped_table() {
  std::vector<std::pair<double, double>> s;
  for (int i = 1; i <= 40; ++i) {
    const double h = 0.125 * i;
    s.push_back({h, h <= 1.0 ? 0.5 * h * h : h - 0.5});
  }
  return CostFunction::custom(s);
}

std::vector<CostFunction> sample_costs() {
  return {CostFunction::power(2), CostFunction::power(3), CostFunction::power(1.5),
          CostFunction::power(2).scaled(0.3), CostFunction::linear_capped(1.5), capped_table()};
}

}  // namespace

TEST(CostFunctions, LegendreDualExamples) {
  EXPECT_DOUBLE_EQ(CostFunction::power(2).legendre_dual(2.0), 2.0);
  EXPECT_NEAR(CostFunction::power(3).legendre_dual(1.0), 2.0 / 3.0, 1e-15);
  for (const auto& c : sample_costs()) EXPECT_EQ(c.legendre_dual(0.0), 0.0);
}

TEST(CostFunctions, BetaExamples) {
  EXPECT_DOUBLE_EQ(CostFunction::power(2).beta(2.0), 2.0);
  EXPECT_NEAR(CostFunction::power(3).beta(1.0), 2.0 / 3.0, 1e-15);
  for (const auto& c : sample_costs()) EXPECT_EQ(c.beta(0.0), 0.0);
}

TEST(CostFunctions, PowerAlphaIsExact) {
  auto c = CostFunction::power(3.5);
  for (double h : {0.1, 1.0, 2.7}) EXPECT_EQ(c.alpha(h), std::pow(h, 3.5) / 3.5);
}

TEST(CostFunctions, DualDivergesBeyondEll) {
  try {
    CostFunction::linear_capped(1.0).legendre_dual(1.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DualDiverges);
  }
  EXPECT_THROW(capped_table().legendre_dual(1.01), Error);
  EXPECT_NO_THROW(capped_table().legendre_dual(1.0));
}

TEST(CostFunctions, ExponentsPower) {
  auto p2 = CostFunction::power(2).exponents();
  EXPECT_EQ(p2.r_alpha, 2.0);
  EXPECT_EQ(p2.p_alpha, 2.0);
  EXPECT_EQ(p2.delta2_constant, 4.0);
  EXPECT_FALSE(p2.estimated);
  auto p35 = CostFunction::power(3.5).exponents();
  EXPECT_EQ(p35.r_alpha, 3.5);
  EXPECT_EQ(p35.delta2_constant, std::pow(2.0, 3.5));
  EXPECT_THROW(CostFunction::power(1).exponents(), Error);
}

TEST(CostFunctions, ExponentsCustomAffineTail) {
  auto c = capped_table();
  EXPECT_EQ(c.ell(), 1.0);
  EXPECT_TRUE(c.ell_truncated());
  auto prof = c.exponents();
  EXPECT_EQ(prof.r_alpha, 1.0);
  EXPECT_TRUE(prof.estimated);
  EXPECT_GE(prof.grid_points, 10000u);
  EXPECT_NEAR(prof.p_alpha, 2.0, 0.05);
  EXPECT_LE(prof.r_alpha, prof.p_alpha);
  auto lc = CostFunction::linear_capped(1.0).exponents();
  EXPECT_EQ(lc.r_alpha, 1.0);
  EXPECT_EQ(lc.p_alpha, 2.0);
}

TEST(CostFunctions, CustomInterpolantReproducesSamples) {
  auto c = capped_table();
  for (const auto& [h, a] : c.samples()) EXPECT_NEAR(c.alpha(h), a, 1e-12);
  EXPECT_NEAR(c.alpha(10.0), 9.5, 1e-12);
  EXPECT_THROW(CostFunction::custom({{1.0, 1.0}, {2.0, 1.5}}), Error);  // concave
}

TEST(CostFunctions, ConvexIncreasingOnSampledGrids) {
  for (const auto& c : sample_costs()) {
    double prev_a = -1.0, prev_d = -1.0;
    const double h = 1e-3;
    for (int i = 0; i < 5000; ++i) {
      const double x = i * h;
      EXPECT_GE(c.alpha(x + h), c.alpha(x)) << c.describe();
      EXPECT_GE(c.alpha(x + 2 * h) - 2 * c.alpha(x + h) + c.alpha(x), -1e-10) << c.describe();
      const double d = c.alpha_prime(x);
      EXPECT_GE(d, prev_d - 1e-12) << c.describe();
      EXPECT_GE(c.alpha(x), prev_a);
      prev_a = c.alpha(x);
      prev_d = d;
    }
  }
}

TEST(CostFunctions, FenchelYoung) {
  for (const auto& c : sample_costs()) {
    for (double h = 0.0; h <= 4.0; h += 0.05) {
      const double up = c.alpha_prime(h);
      EXPECT_NEAR(h * up, c.alpha(h) + c.legendre_dual(up), 1e-9 * (1 + h * up)) << c.describe();
      for (double u = 0.0; u <= std::min(3.0, c.ell()); u += 0.1)
        EXPECT_LE(h * u, c.alpha(h) + c.legendre_dual(u) + 1e-12) << c.describe();
    }
  }
}

TEST(CostFunctions, BetaMatchesDualOfDerivativeAndIsMonotone) {
  for (const auto& c : sample_costs()) {
    double prev = 0.0;
    for (double h = 0.0; h <= 5.0; h += 0.01) {
      const double b = c.beta(h);
      EXPECT_NEAR(b, c.legendre_dual(c.alpha_prime(h)), 1e-9 * (1 + b)) << c.describe();
      EXPECT_GE(b, prev - 1e-12);
      prev = b;
    }
  }
}

TEST(CostFunctions, PowerDualOfDualIsIdentity) {
  for (double p : {1.5, 2.0, 3.0, 4.5}) {
    const double q = p / (p - 1);
    auto c = CostFunction::power(p);
    auto dual = CostFunction::power(q);
    for (double h = 0.0; h <= 3.0; h += 0.1)
      EXPECT_NEAR(dual.legendre_dual(h), c.alpha(h), 1e-10 * (1 + c.alpha(h)));
  }
}

TEST(CostFunctions, ScaledCost) {
  auto c = CostFunction::power(2).scaled(3.0);
  EXPECT_DOUBLE_EQ(c.alpha(2.0), 6.0);
  EXPECT_DOUBLE_EQ(c.alpha_prime(2.0), 6.0);
  EXPECT_DOUBLE_EQ(c.legendre_dual(6.0), 6.0);
  EXPECT_DOUBLE_EQ(c.beta(2.0), 6.0);
}

TEST(CostFunctions, Inverse) {
  for (const auto& c : sample_costs())
    for (double v : {0.01, 0.5, 3.0}) EXPECT_NEAR(c.alpha(c.inverse(v)), v, 1e-10 * (1 + v));
  EXPECT_EQ(CostFunction::power(2).inverse(0.0), 0.0);
}
