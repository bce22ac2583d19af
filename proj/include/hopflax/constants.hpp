#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <string>

#include "hopflax/error.hpp"
#include "hopflax/numeric.hpp"
#include "hopflax/quadrature.hpp"

namespace hopflax {

namespace detail {

inline void require_p(double p) {
  if (!(p >= 2.0) || !std::isfinite(p))
    fail(ErrorKind::ParameterOutOfRange, "p must be a finite real >= 2");
}

/// log(1 − 1/w) for w = (1+v)^{1/(p−1)}.
inline double log_one_minus_inv_w(double v, double p) {
  const double log_w = std::log1p(v) / (p - 1.0);
  const double inv_w = std::exp(-log_w);
  return inv_w < 0.5 ? std::log1p(-inv_w) : std::log(-std::expm1(-log_w));
}

/// β_p(1+v) − 1.
inline double beta_p_minus_one(double v, double p) {
  return std::expm1(-(p - 1.0) * log_one_minus_inv_w(v, p));
}

/// w^p (1 − (1 − 1/w)^p) − 1/x at u = 1 + v, increasing in v.
inline double stationarity(double v, double x, double p) {
  const double log_w = std::log1p(v) / (p - 1.0);
  const double bracket = -std::expm1(p * log_one_minus_inv_w(v, p));
  return std::exp(p * log_w) * bracket - 1.0 / x;
}

inline double stationary_v(double x, double p) {
  const double hi = 1.0 / x - 1.0;
  return bisect_root([&](double v) { return stationarity(v, x, p); }, 0.0, hi, 1e-16, 2000);
}

}  // namespace detail

/// β_p(u) = u / (u^{1/(p−1)} − 1)^{p−1}, evaluated as (1 − u^{−1/(p−1)})^{−(p−1)}.
inline double beta_p(double u, double p) {
  detail::require_p(p);
  if (!(u > 1.0) || !std::isfinite(u))
    fail(ErrorKind::UOutOfRange, "beta_p needs u > 1, got " + std::to_string(u));
  return std::exp(-(p - 1.0) * detail::log_one_minus_inv_w(u - 1.0, p));
}

inline void require_unit_interval(double x) {
  if (!(x > 0.0 && x < 1.0))
    fail(ErrorKind::XOutOfRange, "x must lie in (0, 1), got " + std::to_string(x));
}

/// The unique minimizer u(x) ∈ (1, 1/x) of (β_p(u) − 1)/(1 − xu).
inline double theta_p_argmin(double x, double p) {
  detail::require_p(p);
  require_unit_interval(x);
  return 1.0 + detail::stationary_v(x, p);
}

/// Residual u^{p/(p−1)} − (u^{1/(p−1)} − 1)^p − 1/x at u, relative to 1/x.
inline double stationarity_residual(double u, double x, double p) {
  return detail::stationarity(u - 1.0, x, p) * x;
}

/// θ_p(x) = inf_{1<u<1/x} (β_p(u) − 1)/(1 − xu).
inline double theta_p(double x, double p) {
  detail::require_p(p);
  require_unit_interval(x);
  const double v = detail::stationary_v(x, p);
  return detail::beta_p_minus_one(v, p) / ((1.0 - x) - x * v);
}

/// θ_2(x) = 4x/(1−x)².
inline double theta_2_closed_form(double x) {
  require_unit_interval(x);
  return 4.0 * x / ((1.0 - x) * (1.0 - x));
}

/// φ(s) = θ_p(s) / (s(θ_p(s) + 1)).
inline double phi_p(double s, double p) {
  const double th = theta_p(s, p);
  return th / (s * (th + 1.0));
}

inline constexpr double kConstantsTol = 1e-10;

namespace detail {

/// φ(w^{p−1})(p−1)w^{p−2}, the integrand after s = w^{p−1}; bounded at 0.
inline double phi_w_integrand(double w, double p) {
  if (w >= 1.0) return p - 1.0;  // φ(1) = 1
  if (w <= 0.0) return (p - 1.0) * std::pow(p, p / (p - 1.0));
  const double s = std::pow(w, p - 1.0);
  return phi_p(s, p) * (p - 1.0) * std::pow(w, p - 2.0);
}

}  // namespace detail

/// ∫_{r0}^{r1} φ for 0 ≤ r0, r1 ≤ 1.
inline double phi_integral_between(double r0, double r1, double p, double tol = kConstantsTol) {
  detail::require_p(p);
  if (!(r0 >= 0.0 && r0 <= 1.0 && r1 >= 0.0 && r1 <= 1.0))
    fail(ErrorKind::ParameterOutOfRange, "integration limits must lie in [0, 1]");
  if (r0 == r1) return 0.0;
  const double w0 = std::pow(r0, 1.0 / (p - 1.0)), w1 = std::pow(r1, 1.0 / (p - 1.0));
  const int panels = std::abs(w1 - w0) < 0.05 ? 1 : 4;
  return integrate_adaptive([p](double w) { return detail::phi_w_integrand(w, p); }, w0, w1, tol,
                            panels);
}

/// (p−1)Ψ_p(r) = ∫_0^r φ, computed after s = w^{p−1}, which makes the
/// integrand bounded at 0.
inline double phi_integral(double r, double p, double tol = kConstantsTol) {
  detail::require_p(p);
  if (!(r >= 0.0 && r <= 1.0))
    fail(ErrorKind::ParameterOutOfRange, "integration limit must lie in [0, 1]");
  return phi_integral_between(0.0, r, p, tol);
}

/// κ_p = exp(∫_0^1 φ).
inline double kappa_p(double p, double tol = kConstantsTol) {
  return std::exp(phi_integral(1.0, p, tol));
}

/// Ψ_p(r) = (1/(p−1)) ∫_0^r φ.
inline double psi_p(double r, double p) { return phi_integral(r, p) / (p - 1.0); }

/// Ψ_p(1), memoized per p.
inline double psi_one(double p) {
  static std::mutex mutex;
  static std::map<double, double> cache;
  {
    std::lock_guard<std::mutex> lock(mutex);
    if (auto it = cache.find(p); it != cache.end()) return it->second;
  }
  const double v = psi_p(1.0, p);
  std::lock_guard<std::mutex> lock(mutex);
  cache.emplace(p, v);
  return v;
}

/// a_p = exp(−Ψ_p(1)).
inline double a_p(double p) { return std::exp(-psi_one(p)); }

struct EllSchedule {
  double p = 2.0;
  double a = 0.0;      // a_p
  double t = 1.0;
  double v = 0.0;      // Ψ_p^{-1}(−ln t)
  double ell = 0.0;    // t^{p−1} v
};

/// v(t) = Ψ_p^{-1}(−ln t) and ℓ_p(t) = t^{p−1} v(t) on [a_p, 1].
inline EllSchedule ell_schedule(double p, double t) {
  detail::require_p(p);
  const double psi1 = psi_one(p);
  EllSchedule out;
  out.p = p;
  out.a = std::exp(-psi1);
  out.t = t;
  if (!(t >= out.a * (1.0 - 1e-12) && t <= 1.0))
    fail(ErrorKind::TOutOfRange,
         "t must lie in [a_p, 1] = [" + std::to_string(out.a) + ", 1], got " + std::to_string(t));
  const double target = -std::log(t);
  if (target <= 0.0) {
    out.v = 0.0;
  } else if (target >= psi1) {
    out.v = 1.0;
  } else {
    // Newton on Ψ_p(r) = target with Ψ_p' = φ/(p−1), kept inside a bracket.
    // Ψ_p is tracked incrementally between iterates.
    double lo = 0.0, hi = 1.0, r = 1.0;
    double psi_r = psi1;
    for (int it = 0; it < 100; ++it) {
      const double g = psi_r - target;
      if (std::abs(g) <= 1e-15) break;
      if (g > 0.0) {
        hi = r;
      } else {
        lo = r;
      }
      double next = r - g * (p - 1.0) / (r >= 1.0 ? 1.0 : phi_p(r, p));
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - r) <= 1e-14 || hi - lo <= 1e-15) {
        r = next;
        break;
      }
      psi_r += phi_integral_between(r, next, p) / (p - 1.0);
      r = next;
    }
    out.v = r;
  }
  out.ell = std::pow(t, p - 1.0) * out.v;
  return out;
}

/// θ_p(ℓ/t^{p−1})·t/(p−1) + ℓ/ℓ′ with ℓ′ from central differences.
inline double ell_ode_residual(double p, double t, double h = 1e-4) {
  const EllSchedule mid = ell_schedule(p, t);
  const double lp = (ell_schedule(p, t + h).ell - ell_schedule(p, t - h).ell) / (2.0 * h);
  return theta_p(mid.v, p) * t / (p - 1.0) + mid.ell / lp;
}

}  // namespace hopflax
