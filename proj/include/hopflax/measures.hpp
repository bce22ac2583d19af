#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "hopflax/error.hpp"
#include "hopflax/metric_space.hpp"
#include "hopflax/numeric.hpp"

namespace hopflax {

/// Weights at or below this are treated as exact zeros.
inline constexpr double kNegligibleWeight = 1e-300;

class ProbMeasure {
 public:
  ProbMeasure() = default;

  /// Validates nonnegativity and unit mass within 1e-12.
  explicit ProbMeasure(std::vector<double> weights) : w_(std::move(weights)) {
    require(!w_.empty(), "a measure needs at least one weight");
    for (std::size_t i = 0; i < w_.size(); ++i) {
      if (!std::isfinite(w_[i]) || w_[i] < 0.0)
        fail(ErrorKind::ValidationError,
             "weight at index " + std::to_string(i) + " is negative or not finite", {i});
    }
    const double s = compensated_sum(w_);
    if (std::abs(s - 1.0) > 1e-12) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", s);
      fail(ErrorKind::ValidationError, std::string("weights sum to ") + buf + ", expected 1");
    }
  }

  static ProbMeasure uniform(std::size_t n) {
    return ProbMeasure(std::vector<double>(n, 1.0 / static_cast<double>(n)), Unchecked{});
  }
  static ProbMeasure point_mass(std::size_t n, std::size_t i) {
    require(i < n, "point mass index out of range");
    std::vector<double> w(n, 0.0);
    w[i] = 1.0;
    return ProbMeasure(std::move(w), Unchecked{});
  }
  /// Rescales nonnegative masses to total one.
  static ProbMeasure normalized(std::vector<double> masses) {
    CompensatedSum s;
    for (std::size_t i = 0; i < masses.size(); ++i) {
      if (!std::isfinite(masses[i]) || masses[i] < 0.0)
        fail(ErrorKind::ValidationError,
             "mass at index " + std::to_string(i) + " is negative or not finite", {i});
      s += masses[i];
    }
    const double total = s.value();
    require(total > 0.0, "masses must have positive total");
    for (double& m : masses) m /= total;
    return ProbMeasure(std::move(masses), Unchecked{});
  }

  std::size_t size() const { return w_.size(); }
  double operator[](std::size_t i) const { return w_[i]; }
  std::span<const double> weights() const { return w_; }
  bool charges(std::size_t i) const { return w_[i] > kNegligibleWeight; }
  std::vector<std::size_t> support() const {
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < w_.size(); ++i)
      if (charges(i)) s.push_back(i);
    return s;
  }
  bool is_point_mass() const { return support().size() == 1; }

 private:
  struct Unchecked {};
  ProbMeasure(std::vector<double> w, Unchecked) : w_(std::move(w)) {}

  std::vector<double> w_;
};

inline void require_measure(const MetricSpace& space, const ProbMeasure& mu,
                            const char* what = "measure") {
  if (mu.size() != space.size())
    fail(ErrorKind::ValidationError, std::string(what) + " has " + std::to_string(mu.size()) +
                                         " weights but the space has " +
                                         std::to_string(space.size()) + " points");
}

/// Σ μ_i v_i over the support.
inline double integrate(const ProbMeasure& mu, std::span<const double> v) {
  CompensatedSum s;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (mu.charges(i)) s += mu[i] * v[i];
  return s.value();
}

inline double integrate(const ProbMeasure& mu, const ScalarField& f) {
  return integrate(mu, f.values());
}

/// Ent_μ(g) = Σ μ_i g_i log(g_i / Σ μ_j g_j).
inline double entropy_functional(const ProbMeasure& mu, std::span<const double> g) {
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (mu.charges(i) && !(g[i] > 0.0))
      fail(ErrorKind::NonPositiveField,
           "g(" + std::to_string(i) + ") must be positive on the support", {i});
  const double m = integrate(mu, g);
  const double log_m = std::log(m);
  CompensatedSum s;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (mu.charges(i)) s += mu[i] * g[i] * (std::log(g[i]) - log_m);
  return std::max(0.0, s.value());
}

inline double entropy_functional(const ProbMeasure& mu, const ScalarField& g) {
  return entropy_functional(mu, g.values());
}

namespace detail {

/// e^x − 1 − x without cancellation for small x.
inline double expm1_minus_x(double x) {
  if (std::abs(x) > 1e-2) return std::expm1(x) - x;
  double term = x * x / 2.0, sum = 0.0;
  for (int k = 3; k <= 10; ++k) {
    sum += term;
    term *= x / k;
  }
  return sum;
}

}  // namespace detail

/// Ent_μ(e^f) and Σμe^f, both divided by e^M. M is the maximum of f on
/// the support, or its μ-mean when the oscillation there is at most 1; the
/// second choice keeps the entropy of nearly constant fields accurate.
/// Ratios of such quantities are scale free.
struct ShiftedExpEntropy {
  double entropy = 0.0;
  double mass = 0.0;
  double shift = 0.0;
  std::vector<double> weights;  // e^{f−M}
};

inline ShiftedExpEntropy entropy_exp_shifted(const ProbMeasure& mu, std::span<const double> f) {
  ShiftedExpEntropy out;
  double hi = -kInf, lo = kInf;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (mu.charges(i)) {
      hi = std::max(hi, f[i]);
      lo = std::min(lo, f[i]);
    }
  out.weights.assign(mu.size(), 0.0);
  if (hi - lo <= 1.0) {
    // Ent = Σμg + Σμ g·expm1(g) − (1+a)log1p(a), with g = f − mean and
    // a = Σμ expm1(g) split as Σμg + Σμ(e^g − 1 − g). Differences to a support value are exact, so g is
    // centred to its own precision and no term cancels to leading order.
    const double ref = hi;
    CompensatedSum centre;
    for (std::size_t i = 0; i < mu.size(); ++i)
      if (mu.charges(i)) centre += mu[i] * (f[i] - ref);
    const double offset = centre.value();
    out.shift = ref + offset;
    CompensatedSum mean_g, curv, cross;
    for (std::size_t i = 0; i < mu.size(); ++i) {
      if (!mu.charges(i)) continue;
      const double g = (f[i] - ref) - offset;
      const double em = std::expm1(g);
      out.weights[i] = 1.0 + em;
      mean_g += mu[i] * g;
      curv += mu[i] * detail::expm1_minus_x(g);
      cross += mu[i] * g * em;
    }
    const double av = mean_g.value() + curv.value();
    out.mass = 1.0 + av;
    out.entropy = std::max(0.0, mean_g.value() + cross.value() - out.mass * std::log1p(av));
    return out;
  }
  out.shift = hi;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (mu.charges(i)) out.weights[i] = std::exp(f[i] - out.shift);
  out.mass = integrate(mu, out.weights);
  const double log_m = std::log(out.mass);
  CompensatedSum s;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (mu.charges(i)) s += mu[i] * out.weights[i] * ((f[i] - out.shift) - log_m);
  out.entropy = std::max(0.0, s.value());
  return out;
}

/// Ent_μ(e^f).
inline double entropy_exp(const ProbMeasure& mu, std::span<const double> f) {
  const auto e = entropy_exp_shifted(mu, f);
  return e.entropy * std::exp(e.shift);
}

/// H(ν|μ) = Σ ν_i log(ν_i/μ_i); +inf when ν charges a μ-null point.
inline double relative_entropy(const ProbMeasure& nu, const ProbMeasure& mu) {
  require(nu.size() == mu.size(), "measures live on spaces of different sizes");
  CompensatedSum s;
  for (std::size_t i = 0; i < nu.size(); ++i) {
    if (!nu.charges(i)) continue;
    if (!mu.charges(i)) return kInf;
    s += nu[i] * std::log(nu[i] / mu[i]);
  }
  return std::max(0.0, s.value());
}

/// log ‖e^f‖_k = (1/k) log Σ μ e^{kf}, and Σ μ f at k = 0.
inline double log_k_norm_exp(const ProbMeasure& mu, std::span<const double> f, double k) {
  if (k == 0.0) return integrate(mu, f);
  double fmax = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (mu.charges(i)) fmax = std::max(fmax, std::abs(f[i]));
  if (std::abs(k) * fmax <= 1.0) {
    CompensatedSum s;
    for (std::size_t i = 0; i < mu.size(); ++i)
      if (mu.charges(i)) s += mu[i] * std::expm1(k * f[i]);
    return std::log1p(s.value()) / k;
  }
  double m = -kInf;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (mu.charges(i)) m = std::max(m, k * f[i]);
  CompensatedSum s;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (mu.charges(i)) s += mu[i] * std::exp(k * f[i] - m);
  return (m + std::log(s.value())) / k;
}

/// ‖g‖_k = (Σ μ |g|^k)^{1/k}; geometric mean at k = 0.
inline double k_norm(const ProbMeasure& mu, std::span<const double> g, double k) {
  bool has_zero = false;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (!mu.charges(i)) continue;
    if (k <= 0.0 && !(g[i] > 0.0))
      fail(ErrorKind::NonPositiveField,
           "g(" + std::to_string(i) + ") must be positive on the support for k <= 0", {i});
    if (g[i] == 0.0) has_zero = true;
  }
  if (has_zero) {
    double m = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i)
      if (mu.charges(i)) m = std::max(m, std::abs(g[i]));
    if (m == 0.0) return 0.0;
    CompensatedSum s;
    for (std::size_t i = 0; i < mu.size(); ++i)
      if (mu.charges(i)) s += mu[i] * std::pow(std::abs(g[i]) / m, k);
    return m * std::pow(s.value(), 1.0 / k);
  }
  std::vector<double> logs(g.size(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i)
    if (mu.charges(i)) logs[i] = std::log(std::abs(g[i]));
  return std::exp(log_k_norm_exp(mu, logs, k));
}

inline double k_norm(const ProbMeasure& mu, const ScalarField& g, double k) {
  return k_norm(mu, g.values(), k);
}

/// Var_μ(f) = Σ μ (f − Σμf)².
inline double variance(const ProbMeasure& mu, std::span<const double> f) {
  const double mean = integrate(mu, f);
  CompensatedSum s;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (mu.charges(i)) s += mu[i] * (f[i] - mean) * (f[i] - mean);
  return s.value();
}

inline double variance(const ProbMeasure& mu, const ScalarField& f) {
  return variance(mu, f.values());
}

}  // namespace hopflax
