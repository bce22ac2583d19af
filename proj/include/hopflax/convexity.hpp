#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "hopflax/cost_functions.hpp"
#include "hopflax/hopf_lax.hpp"
#include "hopflax/metric_space.hpp"

namespace hopflax {

/// P_cQ_c g, the largest c-convex minorant of g.
inline ScalarField c_convexify(const SquareMatrix& c, const ScalarField& g) {
  return p_c_transform(c, q_c_transform(c, g));
}

struct ConvexityCheck {
  bool convex = false;
  /// max_x (f(x) − P_cQ_cf(x)); never below −tol.
  double deviation = 0.0;
  std::size_t worst_point = 0;
};

inline ConvexityCheck is_c_convex(const SquareMatrix& c, const ScalarField& f,
                                  double tol = 1e-10) {
  const ScalarField hull = c_convexify(c, f);
  ConvexityCheck out;
  double worst = -kInf;
  for (std::size_t x = 0; x < f.size(); ++x) {
    const double dev = f[x] - hull[x];
    if (std::abs(dev) > worst) {
      worst = std::abs(dev);
      out.deviation = dev;
      out.worst_point = x;
    }
  }
  out.convex = worst <= tol;
  return out;
}

/// Per-point c-subdifferentials. When the input was not c-convex the sets
/// are those of its convexification and `convexified` is set.
struct Subdifferential {
  std::vector<std::vector<std::size_t>> sets;
  double tie_tol = kDefaultTieTol;
  bool convexified = false;
  double deviation = 0.0;
  ScalarField field;

  const std::vector<std::size_t>& at(std::size_t x) const { return sets[x]; }
  bool contains(std::size_t x, std::size_t y) const {
    return std::binary_search(sets[x].begin(), sets[x].end(), y);
  }
};

/// ∂_cf(x) = {y : f(x) = Q_cf(y) − c(x,y)}, admitting near-ties.
inline Subdifferential subdifferential(const SquareMatrix& c, const ScalarField& f,
                                       bool strict = false, double tie_tol = kDefaultTieTol) {
  const auto check = is_c_convex(c, f);
  Subdifferential sub;
  sub.tie_tol = tie_tol;
  sub.deviation = check.deviation;
  if (!check.convex) {
    if (strict)
      fail(ErrorKind::NotCConvex,
           "field deviates from its c-convexification by " + std::to_string(check.deviation) +
               " at point " + std::to_string(check.worst_point),
           {check.worst_point});
    sub.convexified = true;
    sub.field = c_convexify(c, f);
  } else {
    sub.field = f;
  }
  const ScalarField qc = q_c_transform(c, sub.field);
  const std::size_t n = f.size();
  sub.sets.assign(n, {});
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      if (qc[y] - c(x, y) >= sub.field[x] - tie_tol) sub.sets[x].push_back(y);
  return sub;
}

/// max over slope neighbours y of [f(y) − f(x)]_+ / d(x,y).
inline double slope_plus(const MetricSpace& space, const ScalarField& f, std::size_t x) {
  double s = 0.0;
  for (std::size_t y : space.neighbors(x))
    s = std::max(s, std::max(0.0, f[y] - f[x]) / space.dist(x, y));
  return s;
}

/// max over slope neighbours y of [f(y) − f(x)]_- / d(x,y).
inline double slope_minus(const MetricSpace& space, const ScalarField& f, std::size_t x) {
  double s = 0.0;
  for (std::size_t y : space.neighbors(x))
    s = std::max(s, std::max(0.0, f[x] - f[y]) / space.dist(x, y));
  return s;
}

inline std::vector<double> slopes_plus(const MetricSpace& space, const ScalarField& f) {
  require_field(space, f);
  std::vector<double> out(space.size());
  for (std::size_t x = 0; x < space.size(); ++x) out[x] = slope_plus(space, f, x);
  return out;
}

inline std::vector<double> slopes_minus(const MetricSpace& space, const ScalarField& f) {
  require_field(space, f);
  std::vector<double> out(space.size());
  for (std::size_t x = 0; x < space.size(); ++x) out[x] = slope_minus(space, f, x);
  return out;
}

/// c-gradients for the cost Kα(d): Kα' at the largest (plus) or smallest
/// (minus) distance from x to ∂_{Kc}f(x).
struct CGradients {
  std::vector<double> plus;
  std::vector<double> minus;
  Subdifferential sub;
};

inline CGradients c_gradients(const MetricSpace& space, const CostFunction& cost, double K,
                              const ScalarField& f, bool strict = false,
                              double tie_tol = kDefaultTieTol) {
  require_field(space, f);
  const CostFunction kc = cost.scaled(K);
  CGradients out;
  out.sub = subdifferential(cost_matrix(space, kc), f, strict, tie_tol);
  const std::size_t n = space.size();
  out.plus.assign(n, 0.0);
  out.minus.assign(n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    double dmax = 0.0, dmin = kInf;
    for (std::size_t y : out.sub.at(x)) {
      dmax = std::max(dmax, space.dist(x, y));
      dmin = std::min(dmin, space.dist(x, y));
    }
    out.plus[x] = kc.alpha_prime(dmax);
    out.minus[x] = kc.alpha_prime(dmin);
  }
  return out;
}

inline double c_gradient_plus(const MetricSpace& space, const CostFunction& cost, double K,
                              const ScalarField& f, std::size_t x, bool strict = false) {
  return c_gradients(space, cost, K, f, strict).plus.at(x);
}

inline double c_gradient_minus(const MetricSpace& space, const CostFunction& cost, double K,
                               const ScalarField& f, std::size_t x, bool strict = false) {
  return c_gradients(space, cost, K, f, strict).minus.at(x);
}

/// Gradient comparison for f = P_c g with c = α(d): every quantity of the
/// chain at each point, with m(x) the maximizers defining P_cg(x).
struct GradientChainRow {
  double slope_plus, alpha_prime_max_m, cgrad_plus;
  double slope_minus, cgrad_minus, alpha_prime_min_m;
};

struct GradientChain {
  ScalarField f;
  std::vector<GradientChainRow> rows;
  /// min over x of cgrad_plus − α'(max_m d) and α'(min_m d) − cgrad_minus.
  double exact_slack = kInf;
};

inline GradientChain gradient_chain(const MetricSpace& space, const CostFunction& cost,
                                    const ScalarField& g, double tie_tol = kDefaultTieTol) {
  require_field(space, g);
  const SquareMatrix c = cost_matrix(space, cost);
  GradientChain chain;
  chain.f = p_c_transform(c, g);
  const CGradients grads = c_gradients(space, cost, 1.0, chain.f, false, tie_tol);
  for (std::size_t x = 0; x < space.size(); ++x) {
    const auto m = transform_extremizers(c, g, x, tie_tol);
    const auto d = extremal_distances(space, m, x);
    GradientChainRow row{slope_plus(space, chain.f, x), cost.alpha_prime(d.max),
                         grads.plus[x], slope_minus(space, chain.f, x), grads.minus[x],
                         cost.alpha_prime(d.min)};
    chain.exact_slack = std::min({chain.exact_slack, row.cgrad_plus - row.alpha_prime_max_m,
                                  row.alpha_prime_min_m - row.cgrad_minus});
    chain.rows.push_back(row);
  }
  return chain;
}

}  // namespace hopflax
