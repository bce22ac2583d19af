#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <numbers>

#include "hopflax/constants.hpp"
#include "test_util.hpp"

using namespace hopflax;

TEST(BetaP, Examples) {
  EXPECT_NEAR(beta_p(4.0, 2.0), 4.0 / 3.0, 1e-14);
  EXPECT_NEAR(beta_p(2.0, 2.0), 2.0, 1e-14);
  // 8/(2√2 − 1)², evaluated independently.
  EXPECT_NEAR(beta_p(8.0, 3.0), 2.39295579583549, 1e-10);
}

TEST(BetaP, Limits) {
  EXPECT_GT(beta_p(1.0 + 1e-12, 3.0), 1e20);
  EXPECT_NEAR(beta_p(1e12, 2.5), 1.0, 1e-5);
  tu::expect_kind(ErrorKind::UOutOfRange, [] { beta_p(1.0, 2.0); });
  tu::expect_kind(ErrorKind::UOutOfRange, [] { beta_p(0.5, 2.0); });
  tu::expect_kind(ErrorKind::ParameterOutOfRange, [] { beta_p(2.0, 1.5); });
}

TEST(ThetaP, ClosedFormP2) {
  EXPECT_NEAR(theta_p(0.5, 2.0), 8.0, 1e-10);
  EXPECT_NEAR(theta_p(0.9, 2.0), 360.0, 1e-8);
  double worst = 0.0;
  for (int i = 1; i <= 99; ++i) {
    const double x = i / 100.0;
    worst = std::max(worst, std::abs(theta_p(x, 2.0) - theta_2_closed_form(x)));
  }
  EXPECT_LE(worst, 1e-10);
}

TEST(ThetaP, DenseScanP3) {
  const double x = 0.25, p = 3.0;
  double best = kInf;
  for (double u = 1.0 + 1e-6; u < 1.0 / x; u += 1e-6)
    best = std::min(best, (beta_p(u, p) - 1.0) / (1.0 - x * u));
  EXPECT_NEAR(theta_p(x, p), best, 1e-8);
  EXPECT_LE(theta_p(x, p), best + 1e-12);
}

TEST(ThetaP, StationarityResidual) {
  for (double p : {2.0, 2.5, 3.0, 4.0})
    for (double x : {1e-4, 0.01, 0.3, 0.7, 0.99}) {
      const double u = theta_p_argmin(x, p);
      EXPECT_GT(u, 1.0);
      EXPECT_LT(u, 1.0 / x);
      EXPECT_LE(std::abs(stationarity_residual(u, x, p)), 1e-9) << p << " " << x;
    }
  tu::expect_kind(ErrorKind::XOutOfRange, [] { theta_p(1.0, 2.0); });
  tu::expect_kind(ErrorKind::XOutOfRange, [] { theta_p(0.0, 3.0); });
}

TEST(Phi, IntegrandP2) {
  EXPECT_NEAR(phi_p(0.5, 2.0), 16.0 / 9.0, 1e-10);
  for (double p : {2.0, 2.5, 3.0, 4.0}) EXPECT_LE(std::abs(phi_p(1.0 - 1e-4, p) - 1.0), 1e-2);
}

TEST(Phi, SmallSAsymptote) {
  const double s = 1e-6;
  for (double p : {2.5, 3.0, 4.0}) {
    const double ratio =
        phi_p(s, p) * std::pow(s, (p - 2.0) / (p - 1.0)) / std::pow(p, p / (p - 1.0));
    EXPECT_GE(ratio, 0.9) << p;
    EXPECT_LE(ratio, 1.1) << p;
  }
}

TEST(Kappa, P2IsESquared) {
  const auto start = std::chrono::steady_clock::now();
  const double k = kappa_p(2.0);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_NEAR(k, std::exp(2.0), 1e-6);
  EXPECT_LT(secs, 1.0);
}

TEST(Kappa, P3StableUnderRefinement) {
  const double coarse = kappa_p(3.0, 1e-10);
  const double fine = kappa_p(3.0, 1e-13);
  EXPECT_NEAR(coarse / fine, 1.0, 1e-7);
  EXPECT_GT(coarse, std::exp(2.0));
}

TEST(EllSchedule, Endpoints) {
  for (double p : {2.0, 3.0}) {
    const auto one = ell_schedule(p, 1.0);
    EXPECT_EQ(one.v, 0.0);
    EXPECT_EQ(one.ell, 0.0);
    const auto low = ell_schedule(p, one.a);
    EXPECT_NEAR(low.v, 1.0, 1e-9);
    EXPECT_NEAR(low.ell, std::pow(one.a, p - 1.0), 1e-12);
    const double C = 0.7;
    EXPECT_NEAR(C / low.ell, C * kappa_p(p), 1e-6 * kappa_p(p));
  }
  EXPECT_NEAR(ell_schedule(2.0, 1.0).a, std::exp(-2.0), 1e-10);
  tu::expect_kind(ErrorKind::TOutOfRange, [] { ell_schedule(2.0, 0.1); });
  tu::expect_kind(ErrorKind::TOutOfRange, [] { ell_schedule(2.0, 1.5); });
}

TEST(EllSchedule, DefiningOde) {
  for (double p : {2.0, 3.0}) {
    const double a = a_p(p);
    for (double frac : {0.2, 0.5, 0.8}) {
      const double t = a + frac * (1.0 - a);
      EXPECT_LE(std::abs(ell_ode_residual(p, t)), 1e-5) << p << " " << t;
    }
  }
}

TEST(EllSchedule, Monotone) {
  const double a = a_p(2.5);
  double prev = -1.0;
  for (int i = 0; i <= 8; ++i) {
    const double t = 1.0 - (1.0 - a) * i / 8.0;
    const double v = ell_schedule(2.5, t).v;
    EXPECT_GT(v, prev);
    prev = v;
  }
}
