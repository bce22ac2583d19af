#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>

namespace hopflax {

/// Gauss–Legendre rule on [-1, 1] with N nodes, built by Newton iteration
/// on the Legendre recurrence.
template <std::size_t N>
struct GaussLegendre {
  std::array<double, N> nodes{};
  std::array<double, N> weights{};

  GaussLegendre() {
    for (std::size_t i = 0; i < (N + 1) / 2; ++i) {
      double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                          (static_cast<double>(N) + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (std::size_t k = 2; k <= N; ++k) {
          const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
          p0 = p1;
          p1 = pk;
        }
        dp = static_cast<double>(N) * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= N; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = pk;
      }
      dp = static_cast<double>(N) * (x * p1 - p0) / (x * x - 1.0);
      const double w = 2.0 / ((1.0 - x * x) * dp * dp);
      nodes[i] = -x;
      nodes[N - 1 - i] = x;
      weights[i] = w;
      weights[N - 1 - i] = w;
    }
  }

  template <class F>
  double integrate(F&& f, double a, double b) const {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < N; ++i) s += weights[i] * f(mid + half * nodes[i]);
    return half * s;
  }
};

inline const GaussLegendre<64>& gauss_legendre_64() {
  static const GaussLegendre<64> rule;
  return rule;
}

namespace detail {

template <class F>
double adaptive_panel(F& f, double a, double b, double whole, double tol, int depth) {
  const auto& rule = gauss_legendre_64();
  const double m = 0.5 * (a + b);
  const double left = rule.integrate(f, a, m);
  const double right = rule.integrate(f, m, b);
  if (std::abs(left + right - whole) <= tol || depth >= 40) return left + right;
  return adaptive_panel(f, a, m, left, 0.5 * tol, depth + 1) +
         adaptive_panel(f, m, b, right, 0.5 * tol, depth + 1);
}

}  // namespace detail

/// Composite 64-node Gauss–Legendre on `panels` equal panels, each bisected
/// until the two halves agree with the whole to within its share of tol.
template <class F>
double integrate_adaptive(F&& f, double a, double b, double tol = 1e-10, int panels = 4) {
  if (b == a) return 0.0;
  const auto& rule = gauss_legendre_64();
  double total = 0.0;
  const double h = (b - a) / panels;
  for (int k = 0; k < panels; ++k) {
    const double lo = a + k * h;
    const double hi = k + 1 == panels ? b : lo + h;
    total += detail::adaptive_panel(f, lo, hi, rule.integrate(f, lo, hi), tol / panels, 0);
  }
  return total;
}

}  // namespace hopflax
