#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hopflax/constants.hpp"
#include "hopflax/convexity.hpp"
#include "hopflax/cost_functions.hpp"
#include "hopflax/error.hpp"
#include "hopflax/hopf_lax.hpp"
#include "hopflax/measures.hpp"
#include "hopflax/metric_space.hpp"
#include "hopflax/numeric.hpp"
#include "hopflax/parallel.hpp"
#include "hopflax/transport.hpp"

namespace hopflax {

enum class InequalityName { LSI, Tp, TauLSI, RestrictedLSI, Poincare, Hypercontractivity };
enum class BoundSide { lower_bound, upper_bound };
enum class WitnessKind { none, field, measure };
enum class RestrictedVariant { minus_cgrad, plus_slope };

constexpr std::string_view to_string(InequalityName n) {
  switch (n) {
    case InequalityName::LSI: return "LSI";
    case InequalityName::Tp: return "Tp";
    case InequalityName::TauLSI: return "TauLSI";
    case InequalityName::RestrictedLSI: return "RestrictedLSI";
    case InequalityName::Poincare: return "Poincare";
    case InequalityName::Hypercontractivity: return "Hypercontractivity";
  }
  return "Unknown";
}

constexpr std::string_view to_string(BoundSide b) {
  return b == BoundSide::lower_bound ? "lower_bound" : "upper_bound";
}

constexpr std::string_view to_string(RestrictedVariant v) {
  return v == RestrictedVariant::minus_cgrad ? "minus_cgrad" : "plus_slope";
}

/// Result of a constant search. The witness (a field or a measure, plus
/// any scalar parameters such as λ or (K, u)) reproduces constant_estimate
/// through the matching replay function.
struct InequalityReport {
  InequalityName name = InequalityName::LSI;
  double constant_estimate = 0.0;
  BoundSide bound_side = BoundSide::lower_bound;
  WitnessKind witness_kind = WitnessKind::none;
  std::vector<double> witness;
  std::vector<double> parameters;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::string family;
  /// Final field of every restart, in restart order.
  std::vector<ScalarField> pool;
};

/// Search settings shared by the estimators.
struct AscentOptions {
  int max_iterations = 200;
  double min_relative_gain = 1e-8;
  double min_step = 1e-6;
};

namespace detail {

/// Coordinatewise ascent with step halving. obj returns −inf for points
/// outside its domain. Coordinates with box[i] set are clamped.
template <class Obj>
double coordinate_ascent(std::vector<double>& x, Obj&& obj, double step,
                         const std::vector<std::pair<double, double>>& box,
                         const AscentOptions& opt = {}) {
  auto clamp = [&](std::size_t i, double v) {
    if (i < box.size() && box[i].first < box[i].second)
      return std::clamp(v, box[i].first, box[i].second);
    return v;
  };
  double best = obj(x);
  for (int it = 0; it < opt.max_iterations && step >= opt.min_step; ++it) {
    const double before = best;
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (double sign : {1.0, -1.0}) {
        std::vector<double> y = x;
        y[i] = clamp(i, x[i] + sign * step);
        if (y[i] == x[i]) continue;
        const double v = obj(y);
        if (v > best) {
          best = v;
          x = std::move(y);
          break;
        }
      }
    }
    const bool gained = std::isfinite(best) &&
                        (!std::isfinite(before) ||
                         best - before > opt.min_relative_gain * std::abs(before));
    if (!gained) step *= 0.5;
  }
  return best;
}

inline std::vector<double> gaussian_values(Rng& rng, std::size_t n, double scale) {
  std::vector<double> v(n);
  for (double& e : v) e = scale * rng.normal();
  return v;
}

/// Restart r applies no smoothing, Q_0.1 or Q_1 in turn.
inline ScalarField smoothed_field(const MetricSpace& space, const CostFunction& cost, Rng& rng,
                                  std::size_t restart, double scale) {
  ScalarField f(gaussian_values(rng, space.size(), scale));
  switch (restart % 3) {
    case 1: return inf_convolution(space, cost, f, 0.1);
    case 2: return inf_convolution(space, cost, f, 1.0);
    default: return f;
  }
}

inline double max_slope_minus(const MetricSpace& space, std::span<const double> f) {
  const ScalarField field(std::vector<double>(f.begin(), f.end()));
  double m = 0.0;
  for (std::size_t x = 0; x < space.size(); ++x) m = std::max(m, slope_minus(space, field, x));
  return m;
}

/// Lowest-index maximum, so the reduction does not depend on scheduling.
inline std::size_t best_index(const std::vector<double>& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best] || (!std::isfinite(values[best]) && std::isfinite(values[i])))
      best = i;
  return best;
}

inline void require_budget(std::size_t budget) {
  if (budget < 1) fail(ErrorKind::ParameterOutOfRange, "budget must be at least 1");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Modified log-Sobolev inequality

struct LsiRatio {
  double numerator = 0.0;    // Ent(e^f) e^{−M}
  double denominator = 0.0;  // ∫α*(|∇⁻f|)e^f dμ · e^{−M}
  bool defined = false;
  double value = 0.0;
};

/// Ent_μ(e^f) / ∫α*(|∇⁻f|)e^f dμ. Undefined when the denominator vanishes.
inline LsiRatio lsi_ratio(const MetricSpace& space, const CostFunction& cost,
                          const ProbMeasure& mu, const ScalarField& f) {
  require_field(space, f);
  require_measure(space, mu);
  const std::vector<double> slopes = slopes_minus(space, f);
  const double ell = cost.ell();
  if (std::isfinite(ell)) {
    const double m = *std::max_element(slopes.begin(), slopes.end());
    if (m > ell * (1.0 + 1e-12))
      fail(ErrorKind::FieldOutsideClass, "largest slope " + std::to_string(m) +
                                             " exceeds the cost's asymptotic slope " +
                                             std::to_string(ell));
  }
  const auto e = entropy_exp_shifted(mu, f.values());
  CompensatedSum den;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (mu.charges(i)) den += mu[i] * cost.legendre_dual(std::min(slopes[i], ell)) * e.weights[i];
  LsiRatio r;
  r.numerator = e.entropy;
  r.denominator = den.value();
  r.defined = r.denominator > 0.0;
  if (r.defined) r.value = r.numerator / r.denominator;
  return r;
}

/// Largest LSI ratio found from Gaussian restarts followed by ascent.
inline InequalityReport estimate_lsi_constant(const MetricSpace& space, const CostFunction& cost,
                                              const ProbMeasure& mu, std::size_t budget,
                                              std::uint64_t seed) {
  detail::require_budget(budget);
  require_measure(space, mu);
  const double ell = cost.ell();
  std::vector<double> best(budget, -kInf);
  std::vector<std::vector<double>> fields(budget);
  parallel_for(budget, [&](std::size_t r) {
    Rng rng(mix_seed(seed, r));
    const double scale = rng.log_uniform(0.1, 10.0);
    std::vector<double> f = detail::smoothed_field(space, cost, rng, r, scale).vector();
    if (std::isfinite(ell)) {
      const double m = detail::max_slope_minus(space, f);
      if (m > ell)
        for (double& v : f) v *= ell / m * (1.0 - 1e-9);
    }
    auto obj = [&](const std::vector<double>& g) {
      if (std::isfinite(ell) && detail::max_slope_minus(space, g) > ell * (1.0 + 1e-12))
        return -kInf;
      const auto q = lsi_ratio(space, cost, mu, ScalarField(g));
      return q.defined ? q.value : -kInf;
    };
    double step = 0.5;
    for (double v : f) step = std::max(step, 0.25 * std::abs(v));
    best[r] = detail::coordinate_ascent(f, obj, step, {});
    fields[r] = std::move(f);
  });
  InequalityReport rep;
  rep.name = InequalityName::LSI;
  rep.trials = budget;
  rep.seed = seed;
  rep.family = "gaussian fields, smoothing cycling over {none, Q_0.1, Q_1}, rescaled into the "
               "class, coordinatewise ascent";
  for (std::size_t r = 0; r < budget; ++r) rep.pool.emplace_back(fields[r]);
  const std::size_t b = detail::best_index(best);
  if (std::isfinite(best[b]) && best[b] > 0.0) {
    rep.constant_estimate = best[b];
    rep.witness_kind = WitnessKind::field;
    rep.witness = fields[b];
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Transport-entropy inequality

/// T_c(μ,ν)/H(ν|μ), or −inf when H is below 1e-12 or infinite.
inline double transport_entropy_ratio(const MetricSpace& space, const CostFunction& cost,
                                      const ProbMeasure& mu, const ProbMeasure& nu) {
  const double h = relative_entropy(nu, mu);
  if (!(h >= 1e-12) || !std::isfinite(h)) return -kInf;
  return ot_cost(space, cost, mu, nu).cost / h;
}

/// Largest T_c/H ratio over exponential tilts of μ followed by ascent on
/// the log-weights of ν.
inline InequalityReport estimate_transport_constant(const MetricSpace& space,
                                                    const CostFunction& cost,
                                                    const ProbMeasure& mu, std::size_t budget,
                                                    std::uint64_t seed) {
  detail::require_budget(budget);
  require_measure(space, mu);
  InequalityReport rep;
  rep.name = InequalityName::Tp;
  rep.trials = budget;
  rep.seed = seed;
  rep.family = "exponential tilts of mu by gaussian fields, coordinatewise ascent on log-weights";
  const std::vector<std::size_t> support = mu.support();
  if (support.size() < 2) return rep;
  const std::size_t n = space.size();
  const SquareMatrix c = cost_matrix(space, cost);
  auto measure_of = [&](const std::vector<double>& z) {
    double zmax = -kInf;
    for (double v : z) zmax = std::max(zmax, v);
    std::vector<double> w(n, 0.0);
    for (std::size_t k = 0; k < support.size(); ++k)
      w[support[k]] = mu[support[k]] * std::exp(z[k] - zmax);
    return ProbMeasure::normalized(std::move(w));
  };
  std::vector<double> best(budget, -kInf);
  std::vector<std::vector<double>> witnesses(budget);
  parallel_for(budget, [&](std::size_t r) {
    Rng rng(mix_seed(seed, r));
    const double s = rng.log_uniform(1e-2, 10.0);
    std::vector<double> z(support.size());
    for (double& v : z) v = s * rng.normal();
    auto obj = [&](const std::vector<double>& zz) {
      const ProbMeasure nu = measure_of(zz);
      const double h = relative_entropy(nu, mu);
      if (!(h >= 1e-12) || !std::isfinite(h)) return -kInf;
      return ot_cost(c, mu, nu).cost / h;
    };
    best[r] = detail::coordinate_ascent(z, obj, std::max(0.5, 0.25 * s), {});
    const ProbMeasure nu = measure_of(z);
    witnesses[r].assign(nu.weights().begin(), nu.weights().end());
  });
  const std::size_t b = detail::best_index(best);
  if (std::isfinite(best[b])) {
    rep.constant_estimate = best[b];
    rep.witness_kind = WitnessKind::measure;
    rep.witness = witnesses[b];
  }
  return rep;
}

/// The transport search for the cost d^p/p.
inline InequalityReport estimate_tp_constant(const MetricSpace& space, double p,
                                             const ProbMeasure& mu, std::size_t budget,
                                             std::uint64_t seed) {
  if (!(p >= 1.0)) fail(ErrorKind::ParameterOutOfRange, "p must be at least 1");
  return estimate_transport_constant(space, CostFunction::power(p), mu, budget, seed);
}

// ---------------------------------------------------------------------------
// (τ)-log-Sobolev inequality

namespace detail {

struct TauTerms {
  double entropy = 0.0;  // Ent(e^f) e^{−M}
  double defect = 0.0;   // ∫(f − Q^λf)e^f dμ · e^{−M}
  double shift = 0.0;    // M
};

inline TauTerms tau_terms(const MetricSpace& space, double p, const ProbMeasure& mu,
                          const ScalarField& f, double lambda) {
  const ScalarField q = q_lambda(space, p, f, lambda);
  const auto e = entropy_exp_shifted(mu, f.values());
  CompensatedSum r;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (mu.charges(i)) r += mu[i] * (f[i] - q[i]) * e.weights[i];
  return {e.entropy, r.value(), e.shift};
}

}  // namespace detail

/// (1/(1−λD))∫(f − Q^λf)e^f dμ − Ent_μ(e^f).
inline double tau_lsi_check(const MetricSpace& space, double p, const ProbMeasure& mu, double D,
                            const ScalarField& f, double lambda) {
  if (!(D > 0.0)) fail(ErrorKind::ParameterOutOfRange, "D must be positive");
  if (!(lambda > 0.0 && lambda * D < 1.0))
    fail(ErrorKind::LambdaOutOfRange, "lambda must lie in (0, 1/D)");
  require_field(space, f);
  require_measure(space, mu);
  const auto t = detail::tau_terms(space, p, mu, f, lambda);
  return (t.defect / (1.0 - lambda * D) - t.entropy) * std::exp(t.shift);
}

/// Lower bound (1 − R/Ent)/λ on the τ-LSI constant certified by (f, λ);
/// −inf when Ent(e^f) = 0.
inline double tau_lsi_bound(const MetricSpace& space, double p, const ProbMeasure& mu,
                            const ScalarField& f, double lambda) {
  const auto t = detail::tau_terms(space, p, mu, f, lambda);
  if (!(t.entropy > 0.0)) return -kInf;
  return (1.0 - t.defect / t.entropy) / lambda;
}

inline InequalityReport estimate_tau_lsi_constant(const MetricSpace& space, double p,
                                                  const ProbMeasure& mu, std::size_t budget,
                                                  std::uint64_t seed) {
  detail::require_budget(budget);
  require_measure(space, mu);
  const std::size_t n = space.size();
  const CostFunction cost = CostFunction::power(p);
  std::vector<double> best(budget, -kInf);
  std::vector<std::vector<double>> points(budget);
  std::vector<std::pair<double, double>> box(n + 1, {0.0, 0.0});
  box[n] = {std::log(1e-3), std::log(1e3)};
  parallel_for(budget, [&](std::size_t r) {
    Rng rng(mix_seed(seed, r));
    const double scale = rng.log_uniform(0.1, 10.0);
    std::vector<double> x = detail::smoothed_field(space, cost, rng, r, scale).vector();
    x.push_back(std::log(rng.log_uniform(1e-3, 1e3)));
    auto obj = [&](const std::vector<double>& v) {
      return tau_lsi_bound(space, p, mu, ScalarField(std::vector<double>(v.begin(), v.end() - 1)),
                           std::exp(v.back()));
    };
    best[r] = detail::coordinate_ascent(x, obj, std::max(0.5, 0.25 * scale), box);
    points[r] = std::move(x);
  });
  InequalityReport rep;
  rep.name = InequalityName::TauLSI;
  rep.trials = budget;
  rep.seed = seed;
  rep.family = "gaussian fields with smoothing cycle, lambda log-uniform on [1e-3, 1e3], "
               "coordinatewise ascent on (f, log lambda)";
  for (const auto& x : points) rep.pool.emplace_back(std::vector<double>(x.begin(), x.end() - 1));
  const std::size_t b = detail::best_index(best);
  if (std::isfinite(best[b]) && best[b] > 0.0) {
    rep.constant_estimate = best[b];
    rep.witness_kind = WitnessKind::field;
    rep.witness.assign(points[b].begin(), points[b].end() - 1);
    rep.parameters = {std::exp(points[b].back())};
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Restricted log-Sobolev inequalities

namespace detail {

struct RestrictedTerms {
  ScalarField f;
  double entropy = 0.0;  // scaled by e^{−max f}
  double gradient = 0.0;  // ∫|∇|^q e^f, same scaling
  double shift = 0.0;
};

inline RestrictedTerms restricted_terms(const MetricSpace& space, double p,
                                        const ProbMeasure& mu, double K, const ScalarField& g,
                                        RestrictedVariant variant) {
  const CostFunction cp = CostFunction::power(p);
  RestrictedTerms t;
  t.f = c_convexify(cost_matrix(space, cp.scaled(K)), g);
  const double q = p / (p - 1.0);
  std::vector<double> grad;
  if (variant == RestrictedVariant::minus_cgrad) {
    grad = c_gradients(space, cp, K, t.f).minus;
  } else {
    grad = slopes_plus(space, t.f);
  }
  const auto e = entropy_exp_shifted(mu, t.f.values());
  CompensatedSum s;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (mu.charges(i)) s += mu[i] * std::pow(grad[i], q) * e.weights[i];
  t.entropy = e.entropy;
  t.gradient = s.value();
  t.shift = e.shift;
  return t;
}

}  // namespace detail

/// (β_p(u)−1)/((1−KEu)pK^{q−1}) ∫|∇f|^q e^f dμ − Ent_μ(e^f) for f the
/// Kc_p-convexification of g.
inline double restricted_lsi_check(const MetricSpace& space, double p, const ProbMeasure& mu,
                                   double E, double K, double u, const ScalarField& g,
                                   RestrictedVariant variant) {
  detail::require_p(p);
  if (!(E > 0.0)) fail(ErrorKind::ParameterOutOfRange, "E must be positive");
  if (!(K > 0.0 && K * E < 1.0)) fail(ErrorKind::ParameterOutOfRange, "K must lie in (0, 1/E)");
  if (!(u > 1.0 && u * K * E < 1.0))
    fail(ErrorKind::ParameterOutOfRange, "u must lie in (1, 1/(KE))");
  require_field(space, g);
  require_measure(space, mu);
  const auto t = detail::restricted_terms(space, p, mu, K, g, variant);
  const double q = p / (p - 1.0);
  const double factor =
      detail::beta_p_minus_one(u - 1.0, p) / ((1.0 - K * E * u) * p * std::pow(K, q - 1.0));
  const double rhs = t.gradient > 0.0 ? factor * t.gradient : 0.0;
  return (rhs - t.entropy) * std::exp(t.shift);
}

/// Lower bound [1 − (β_p(u)−1)G/(pK^{q−1}Ent)]/(Ku) certified by (g, K, u);
/// −inf when the convexified field has zero entropy.
inline double restricted_lsi_bound(const MetricSpace& space, double p, const ProbMeasure& mu,
                                   double K, double u, const ScalarField& g,
                                   RestrictedVariant variant) {
  const auto t = detail::restricted_terms(space, p, mu, K, g, variant);
  if (!(t.entropy > 0.0)) return -kInf;
  const double q = p / (p - 1.0);
  const double x = t.gradient > 0.0 ? detail::beta_p_minus_one(u - 1.0, p) * t.gradient /
                                          (p * std::pow(K, q - 1.0) * t.entropy)
                                    : 0.0;
  return (1.0 - x) / (K * u);
}

inline InequalityReport estimate_restricted_lsi_constant(const MetricSpace& space, double p,
                                                         const ProbMeasure& mu,
                                                         RestrictedVariant variant,
                                                         std::size_t budget, std::uint64_t seed) {
  detail::require_p(p);
  detail::require_budget(budget);
  require_measure(space, mu);
  const std::size_t n = space.size();
  const CostFunction cost = CostFunction::power(p);
  std::vector<std::pair<double, double>> box(n + 2, {0.0, 0.0});
  box[n] = {std::log(1e-3), std::log(1e3)};
  box[n + 1] = {std::log(1e-6), std::log(1e3)};
  std::vector<double> best(budget, -kInf);
  std::vector<std::vector<double>> points(budget);
  parallel_for(budget, [&](std::size_t r) {
    Rng rng(mix_seed(seed, r));
    const double scale = rng.log_uniform(0.1, 10.0);
    std::vector<double> x = detail::smoothed_field(space, cost, rng, r, scale).vector();
    x.push_back(std::log(rng.log_uniform(1e-3, 1e3)));
    x.push_back(std::log(rng.log_uniform(1e-6, 1e3)));
    auto obj = [&](const std::vector<double>& v) {
      const ScalarField g(std::vector<double>(v.begin(), v.end() - 2));
      return restricted_lsi_bound(space, p, mu, std::exp(v[n]), 1.0 + std::exp(v[n + 1]), g,
                                  variant);
    };
    best[r] = detail::coordinate_ascent(x, obj, std::max(0.5, 0.25 * scale), box);
    points[r] = std::move(x);
  });
  InequalityReport rep;
  rep.name = InequalityName::RestrictedLSI;
  rep.trials = budget;
  rep.seed = seed;
  rep.family = std::string("Kc_p-convexified gaussian fields, ") + std::string(to_string(variant)) +
               ", K log-uniform on [1e-3, 1e3], u - 1 log-uniform on [1e-6, 1e3], "
               "coordinatewise ascent";
  for (const auto& x : points) rep.pool.emplace_back(std::vector<double>(x.begin(), x.end() - 2));
  const std::size_t b = detail::best_index(best);
  if (std::isfinite(best[b]) && best[b] > 0.0) {
    rep.constant_estimate = best[b];
    rep.witness_kind = WitnessKind::field;
    rep.witness.assign(points[b].begin(), points[b].end() - 2);
    rep.parameters = {std::exp(points[b][n]), 1.0 + std::exp(points[b][n + 1])};
  }
  return rep;
}

/// Per point, min over ȳ ∈ ∂_{Kc_p}f(x) of K(β_p(λ/K)−1)c_p(x,ȳ) − (f − Q^λf)(x),
/// with f the Kc_p-convexification of g.
inline std::vector<double> lemma_adieupec_gap(const MetricSpace& space, double p, double K,
                                              double lambda, const ScalarField& g) {
  detail::require_p(p);
  if (!(K > 0.0 && lambda > K))
    fail(ErrorKind::ParameterOutOfRange, "need lambda > K > 0");
  require_field(space, g);
  const CostFunction cp = CostFunction::power(p);
  const SquareMatrix kc = cost_matrix(space, cp.scaled(K));
  const ScalarField f = c_convexify(kc, g);
  const Subdifferential sub = subdifferential(kc, f);
  const ScalarField q = q_lambda(space, p, f, lambda);
  const double factor = K * (beta_p(lambda / K, p) - 1.0);
  std::vector<double> gaps(space.size(), kInf);
  for (std::size_t x = 0; x < space.size(); ++x)
    for (std::size_t y : sub.at(x))
      gaps[x] = std::min(gaps[x], factor * cp.alpha(space.dist(x, y)) - (f[x] - q[x]));
  return gaps;
}

// ---------------------------------------------------------------------------
// Poincaré inequality

struct PoincareResult {
  double slack = 0.0;
  double a = 0.0;  // θ(x) ≥ min(x², a²) on the sample grid
};

/// Largest a with θ(x) ≥ min(x², a²) on 2001 log-spaced points of [1e-6, 1e6].
inline double theta_floor(const CostFunction& theta) {
  constexpr std::size_t kPoints = 2001;
  const double lo = std::log(1e-6), hi = std::log(1e6);
  const double x0 = 1e-6;
  if (theta.alpha(x0) < x0 * x0 * (1.0 - 1e-12))
    fail(ErrorKind::ThetaBelowFloor, "theta lies below x^2 at the smallest sample x = 1e-6");
  double a = kInf;
  for (std::size_t i = 0; i < kPoints; ++i) {
    const double x = std::exp(lo + (hi - lo) * static_cast<double>(i) / (kPoints - 1));
    const double v = theta.alpha(x);
    if (v < x * x * (1.0 - 1e-12)) a = std::min(a, std::sqrt(std::max(0.0, v)));
  }
  if (!(a > 0.0)) fail(ErrorKind::ThetaBelowFloor, "theta vanishes at a positive sample");
  return std::isfinite(a) ? a : 1e6;
}

/// (C/2)Σμ_i|∇⁻f|(i)² − Var_μ(f).
inline PoincareResult poincare_check(const MetricSpace& space, const CostFunction& theta,
                                     const ProbMeasure& mu, double C, const ScalarField& f) {
  if (!(C >= 0.0) || !std::isfinite(C))
    fail(ErrorKind::ParameterOutOfRange, "C must be nonnegative and finite");
  require_field(space, f);
  require_measure(space, mu);
  PoincareResult out;
  out.a = theta_floor(theta);
  const std::vector<double> s = slopes_minus(space, f);
  CompensatedSum sum;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (mu.charges(i)) sum += mu[i] * s[i] * s[i];
  out.slack = 0.5 * C * sum.value() - variance(mu, f);
  return out;
}

// ---------------------------------------------------------------------------
// Hypercontractivity

struct ScheduleParams {
  double C = 1.0;
  double t_o = 1.0;
  double r_alpha = 2.0;
  double p_alpha = 2.0;

  static ScheduleParams from_cost(const CostFunction& cost, double C, double t_o) {
    if (!(C > 0.0)) fail(ErrorKind::ParameterOutOfRange, "C must be positive");
    if (!(t_o > 0.0)) fail(ErrorKind::ParameterOutOfRange, "t_o must be positive");
    const CostProfile prof = cost.exponents();
    return {C, t_o, prof.r_alpha, prof.p_alpha};
  }
};

namespace detail {

/// (1 + (t − t_o)/(C(e−1)))^{e−1} and its t-derivative; NaN base → 0.
inline std::pair<double, double> schedule_branch(const ScheduleParams& s, double e, double t) {
  const double base = 1.0 + (t - s.t_o) / (s.C * (e - 1.0));
  if (!(base > 0.0)) return {0.0, 0.0};
  return {std::pow(base, e - 1.0), std::pow(base, e - 2.0) / s.C};
}

}  // namespace detail

/// k(t) and k′(t) from the two-branch exponent schedule; with r_α = 1 the
/// schedule is min(1, p-branch).
inline std::pair<double, double> schedule_k(const ScheduleParams& s, double t) {
  if (s.r_alpha <= 1.0) {
    const auto pb = detail::schedule_branch(s, s.p_alpha, t);
    if (pb.first >= 1.0) return {1.0, 0.0};
    return pb;
  }
  return detail::schedule_branch(s, t <= s.t_o ? s.p_alpha : s.r_alpha, t);
}

/// 40 log-spaced points on [1e-3·t_o, 10·t_o].
inline std::vector<double> default_t_grid(double t_o) {
  std::vector<double> grid(40);
  const double lo = std::log(1e-3 * t_o), hi = std::log(10.0 * t_o);
  for (std::size_t i = 0; i < grid.size(); ++i)
    grid[i] = std::exp(lo + (hi - lo) * static_cast<double>(i) / (grid.size() - 1));
  return grid;
}

struct HyperRow {
  double t, k, H;
};

struct HyperProfile {
  std::vector<HyperRow> rows;
  double k0 = 0.0;
  double H0 = 0.0;  // log ‖e^f‖_{k(0)}
  /// max over consecutive grid points of H(t_{i+1}) − H(t_i), and of H(t_0) − H0.
  double max_increase = -kInf;
  bool nonincreasing(double tol = 1e-9) const { return max_increase <= tol; }
};

/// H(t) = log‖e^{Q_tf}‖_{k(t)} on the grid.
inline HyperProfile hypercontractivity_profile(const MetricSpace& space, const CostFunction& cost,
                                               const ProbMeasure& mu, const ScheduleParams& params,
                                               const ScalarField& f, std::vector<double> t_grid = {}) {
  require_field(space, f);
  require_measure(space, mu);
  if (t_grid.empty()) t_grid = default_t_grid(params.t_o);
  HyperProfile prof;
  for (double t : t_grid) {
    const double k = schedule_k(params, t).first;
    if (!(k > 0.0))
      fail(ErrorKind::NonPositiveExponent, "k(t) is not positive at t = " + std::to_string(t));
    const ScalarField q = inf_convolution(space, cost, f, t);
    prof.rows.push_back({t, k, log_k_norm_exp(mu, q.values(), k)});
  }
  prof.k0 = schedule_k(params, 0.0).first;
  prof.H0 = log_k_norm_exp(mu, f.values(), prof.k0);
  if (!prof.rows.empty()) prof.max_increase = prof.rows.front().H - prof.H0;
  for (std::size_t i = 1; i < prof.rows.size(); ++i)
    prof.max_increase = std::max(prof.max_increase, prof.rows[i].H - prof.rows[i - 1].H);
  return prof;
}

/// Differentiable positive exponent schedule t ↦ (k(t), k′(t)).
using ExponentSchedule = std::function<std::pair<double, double>(double)>;

inline ExponentSchedule make_schedule(const ScheduleParams& s) {
  return [s](double t) { return schedule_k(s, t); };
}

/// H(t) = (1/k)log∫e^{kQ_tf}dμ for a given exponent.
inline double log_norm_of_q(const MetricSpace& space, const CostFunction& cost,
                            const ProbMeasure& mu, const ScalarField& f, double t, double k) {
  return log_k_norm_exp(mu, inf_convolution(space, cost, f, t).values(), k);
}

/// Right derivative of H from the entropy formula, with the exact
/// one-sided derivative of Q_tf.
inline double derivative_formula_H(const MetricSpace& space, const CostFunction& cost,
                                   const ProbMeasure& mu, const ExponentSchedule& schedule,
                                   const ScalarField& f, double t) {
  require_field(space, f);
  require_measure(space, mu);
  const auto [k, kp] = schedule(t);
  if (!(k > 0.0))
    fail(ErrorKind::NonPositiveExponent, "k(t) is not positive at t = " + std::to_string(t));
  if (kp == 0.0)
    fail(ErrorKind::DegenerateSchedule, "k'(t) vanishes at t = " + std::to_string(t));
  const ScalarField q = inf_convolution(space, cost, f, t);
  std::vector<double> kq(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) kq[i] = k * q[i];
  const auto e = entropy_exp_shifted(mu, kq);
  CompensatedSum drift;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (mu.charges(i)) drift += mu[i] * dQ_dt_plus(space, cost, f, t, i) * e.weights[i];
  return (kp / (k * k)) * e.entropy / e.mass + drift.value() / e.mass;
}

// ---------------------------------------------------------------------------
// Transport from log-Sobolev

/// A = max(((p_α−1)C)^{r_α−1}, ((p_α−1)C)^{p_α−1}).
inline double otto_villani_constant(const CostProfile& prof, double C) {
  const double b = (prof.p_alpha - 1.0) * C;
  return std::max(std::pow(b, prof.r_alpha - 1.0), std::pow(b, prof.p_alpha - 1.0));
}

// ---------------------------------------------------------------------------
// Chain of optimal constants

struct ChainAudit {
  double p = 2.0;
  double kappa = 0.0;
  double slack = 0.05;
  InequalityReport F, E, D, C;
  bool f_le_e = true, e_le_d = true, d_le_c = true, c_le_kappa_f = true;
  bool ordered() const { return f_le_e && e_le_d && d_le_c && c_le_kappa_f; }
};

/// Estimates F, E, D and C with their own searches and compares them with
/// the expected ordering. The estimates are lower bounds, so failures are
/// reported, never thrown.
inline ChainAudit constant_chain_audit(const MetricSpace& space, double p, const ProbMeasure& mu,
                                       std::size_t budget, std::uint64_t seed,
                                       double slack = 0.05) {
  detail::require_p(p);
  detail::require_budget(budget);
  ChainAudit a;
  a.p = p;
  a.slack = slack;
  a.kappa = kappa_p(p);
  a.F = estimate_restricted_lsi_constant(space, p, mu, RestrictedVariant::plus_slope, budget,
                                         mix_seed(seed, 1));
  a.E = estimate_restricted_lsi_constant(space, p, mu, RestrictedVariant::minus_cgrad, budget,
                                         mix_seed(seed, 2));
  a.D = estimate_tau_lsi_constant(space, p, mu, budget, mix_seed(seed, 3));
  a.C = estimate_tp_constant(space, p, mu, budget, mix_seed(seed, 4));
  const double f = a.F.constant_estimate, e = a.E.constant_estimate;
  const double d = a.D.constant_estimate, c = a.C.constant_estimate;
  const double s = 1.0 + slack;
  a.f_le_e = f <= e * s;
  a.e_le_d = e <= d * s;
  a.d_le_c = d <= c * s;
  a.c_le_kappa_f = c <= a.kappa * f * s;
  return a;
}

}  // namespace hopflax
