#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "hopflax/cost_functions.hpp"
#include "hopflax/metric_space.hpp"
#include "hopflax/parallel.hpp"

namespace hopflax {

inline constexpr double kDefaultTieTol = 1e-10;

/// Points attaining an extremum within tie_tol; `points` is sorted and
/// `points.front()` is the lowest-index exact extremizer when unique.
struct ExtremizerSet {
  std::vector<std::size_t> points;
  double tie_tol = kDefaultTieTol;
  double value = 0.0;

  bool contains(std::size_t y) const {
    return std::binary_search(points.begin(), points.end(), y);
  }
};

/// c(x,y) = tα(d(x,y)/t).
inline SquareMatrix cost_matrix(const MetricSpace& space, const CostFunction& cost,
                                double t = 1.0) {
  return SquareMatrix::generate(space.size(), [&](std::size_t x, std::size_t y) {
    return x == y ? 0.0 : t * cost.alpha(space.dist(x, y) / t);
  });
}

/// c_p(x,y) = d(x,y)^p / p.
inline SquareMatrix power_cost_matrix(const MetricSpace& space, double p, double scale = 1.0) {
  return cost_matrix(space, CostFunction::power(p).scaled(scale), 1.0);
}

namespace detail {

inline void require_time(double t) {
  if (!(t > 0.0) || !std::isfinite(t))
    fail(ErrorKind::ValidationError, "time t must be positive and finite");
}

inline void require_cost_matrix(const SquareMatrix& c, std::size_t n) {
  if (c.size() != n)
    fail(ErrorKind::ValidationError, "cost matrix size " + std::to_string(c.size()) +
                                         " does not match field length " + std::to_string(n));
  for (double v : c.data())
    if (!std::isfinite(v)) fail(ErrorKind::ValidationError, "cost matrix has a non-finite entry");
}

/// out(x) = max_y { f(y) − c(x,y) }.
inline std::vector<double> sup_transform(const SquareMatrix& c, std::span<const double> f) {
  const std::size_t n = f.size();
  std::vector<double> out(n);
  parallel_for(n, [&](std::size_t x) {
    const auto row = c.row(x);
    double best = -kInf;
    for (std::size_t y = 0; y < n; ++y) best = std::max(best, f[y] - row[y]);
    out[x] = best;
  }, 16);
  return out;
}

/// out(y) = min_x { f(x) + c(x,y) }.
inline std::vector<double> inf_transform(const SquareMatrix& c, std::span<const double> f) {
  const std::size_t n = f.size();
  std::vector<double> out(n);
  parallel_for(n, [&](std::size_t y) {
    double best = kInf;
    for (std::size_t x = 0; x < n; ++x) best = std::min(best, f[x] + c(x, y));
    out[y] = best;
  }, 16);
  return out;
}

inline std::vector<double> negated(std::span<const double> v) {
  std::vector<double> out(v.begin(), v.end());
  for (double& e : out) e = -e;
  return out;
}

}  // namespace detail

/// P_tf(x) = max_y { f(y) − tα(d(x,y)/t) }.
inline ScalarField sup_convolution(const MetricSpace& space, const CostFunction& cost,
                                   const ScalarField& f, double t) {
  detail::require_time(t);
  require_field(space, f);
  return ScalarField(detail::sup_transform(cost_matrix(space, cost, t), f.values()));
}

/// Q_tf = −P_t(−f).
inline ScalarField inf_convolution(const MetricSpace& space, const CostFunction& cost,
                                   const ScalarField& f, double t) {
  return -sup_convolution(space, cost, -f, t);
}

/// Q^λf(x) = min_y { f(y) + λ d(x,y)^p / p }.
inline ScalarField q_lambda(const MetricSpace& space, double p, const ScalarField& f,
                            double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    fail(ErrorKind::LambdaOutOfRange, "lambda must be positive and finite");
  return inf_convolution(space, CostFunction::power(p).scaled(lambda), f, 1.0);
}

/// Argmax set m(t,x) of y ↦ f(y) − tα(d(x,y)/t).
inline ExtremizerSet extremizer_set(const MetricSpace& space, const CostFunction& cost,
                                    const ScalarField& f, double t, std::size_t x,
                                    double tie_tol = kDefaultTieTol) {
  detail::require_time(t);
  require_field(space, f);
  require(x < space.size(), "point index out of range");
  const std::size_t n = space.size();
  std::vector<double> vals(n);
  double best = -kInf;
  for (std::size_t y = 0; y < n; ++y) {
    vals[y] = f[y] - (y == x ? 0.0 : t * cost.alpha(space.dist(x, y) / t));
    best = std::max(best, vals[y]);
  }
  ExtremizerSet set{{}, tie_tol, best};
  for (std::size_t y = 0; y < n; ++y)
    if (vals[y] >= best - tie_tol) set.points.push_back(y);
  return set;
}

/// Argmin set of y ↦ f(y) + tα(d(x,y)/t), the minimizers defining Q_tf(x).
inline ExtremizerSet minimizer_set(const MetricSpace& space, const CostFunction& cost,
                                   const ScalarField& f, double t, std::size_t x,
                                   double tie_tol = kDefaultTieTol) {
  ExtremizerSet set = extremizer_set(space, cost, -f, t, x, tie_tol);
  set.value = -set.value;
  return set;
}

struct ExtremalDistances {
  double max = 0.0;
  double min = 0.0;
};

inline ExtremalDistances extremal_distances(const MetricSpace& space, const ExtremizerSet& set,
                                            std::size_t x) {
  ExtremalDistances d{0.0, kInf};
  for (std::size_t y : set.points) {
    d.max = std::max(d.max, space.dist(x, y));
    d.min = std::min(d.min, space.dist(x, y));
  }
  return d;
}

/// Right derivative of t ↦ P_tf(x): β(max_{m(t,x)} d(x,ȳ) / t).
inline double dP_dt_plus(const MetricSpace& space, const CostFunction& cost, const ScalarField& f,
                         double t, std::size_t x, double tie_tol = kDefaultTieTol) {
  const auto set = extremizer_set(space, cost, f, t, x, tie_tol);
  return cost.beta(extremal_distances(space, set, x).max / t);
}

/// Left derivative of t ↦ P_tf(x): β(min_{m(t,x)} d(x,ȳ) / t).
inline double dP_dt_minus(const MetricSpace& space, const CostFunction& cost,
                          const ScalarField& f, double t, std::size_t x,
                          double tie_tol = kDefaultTieTol) {
  const auto set = extremizer_set(space, cost, f, t, x, tie_tol);
  return cost.beta(extremal_distances(space, set, x).min / t);
}

/// Right derivative of t ↦ Q_tf(x), through Q_tf = −P_t(−f).
inline double dQ_dt_plus(const MetricSpace& space, const CostFunction& cost, const ScalarField& f,
                         double t, std::size_t x, double tie_tol = kDefaultTieTol) {
  return -dP_dt_plus(space, cost, -f, t, x, tie_tol);
}

struct TransformPair {
  ScalarField p_c;
  ScalarField q_c;
};

/// P_cf(x) = max_y {f(y) − c(x,y)} and Q_cf(y) = min_x {f(x) + c(x,y)}
/// for an arbitrary finite cost matrix.
inline TransformPair general_transforms(const SquareMatrix& c, const ScalarField& f) {
  detail::require_cost_matrix(c, f.size());
  return {ScalarField(detail::sup_transform(c, f.values())),
          ScalarField(detail::inf_transform(c, f.values()))};
}

inline ScalarField p_c_transform(const SquareMatrix& c, const ScalarField& g) {
  detail::require_cost_matrix(c, g.size());
  return ScalarField(detail::sup_transform(c, g.values()));
}

inline ScalarField q_c_transform(const SquareMatrix& c, const ScalarField& f) {
  detail::require_cost_matrix(c, f.size());
  return ScalarField(detail::inf_transform(c, f.values()));
}

/// Argmax set of y ↦ g(y) − c(x,y), the maximizers m(x) defining P_cg(x).
inline ExtremizerSet transform_extremizers(const SquareMatrix& c, const ScalarField& g,
                                           std::size_t x, double tie_tol = kDefaultTieTol) {
  const auto row = c.row(x);
  double best = -kInf;
  for (std::size_t y = 0; y < g.size(); ++y) best = std::max(best, g[y] - row[y]);
  ExtremizerSet set{{}, tie_tol, best};
  for (std::size_t y = 0; y < g.size(); ++y)
    if (g[y] - row[y] >= best - tie_tol) set.points.push_back(y);
  return set;
}

/// One row per (t, x) of a Hopf-Lax evolution.
struct EvolutionRow {
  double t;
  std::size_t x;
  double ptf, qtf, dplus, dminus, maxdist, mindist;
};

inline std::vector<EvolutionRow> evolve(const MetricSpace& space, const CostFunction& cost,
                                        const ScalarField& f, const std::vector<double>& times,
                                        double tie_tol = kDefaultTieTol) {
  std::vector<EvolutionRow> rows;
  for (double t : times) {
    const ScalarField pt = sup_convolution(space, cost, f, t);
    const ScalarField qt = inf_convolution(space, cost, f, t);
    for (std::size_t x = 0; x < space.size(); ++x) {
      const auto set = extremizer_set(space, cost, f, t, x, tie_tol);
      const auto d = extremal_distances(space, set, x);
      rows.push_back({t, x, pt[x], qt[x], cost.beta(d.max / t), cost.beta(d.min / t), d.max,
                      d.min});
    }
  }
  return rows;
}

}  // namespace hopflax
