#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "hopflax/measures.hpp"
#include "hopflax/metric_space.hpp"
#include "hopflax/numeric.hpp"

namespace hopflax {

inline MetricSpace two_point_space(double d = 1.0) {
  return build_matrix_space(SquareMatrix::from_rows({{0.0, d}, {d, 0.0}}));
}

/// Path 0 - 1 - ... - (n−1) with unit edges.
inline MetricSpace path_space(std::size_t n) {
  std::vector<WeightedEdge> edges;
  for (std::size_t i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, 1.0});
  return build_graph_space(edges, n);
}

/// Random points in the unit square with Euclidean distances.
inline MetricSpace random_euclidean_space(Rng& rng, std::size_t n) {
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = rng.uniform();
    ys[i] = rng.uniform();
  }
  auto m = SquareMatrix::generate(n, [&](std::size_t i, std::size_t j) {
    return i == j ? 0.0 : std::hypot(xs[i] - xs[j], ys[i] - ys[j]);
  });
  return build_matrix_space(std::move(m));
}

/// Random connected graph metric: a random tree plus extra edges.
inline MetricSpace random_graph_space(Rng& rng, std::size_t n) {
  std::vector<WeightedEdge> edges;
  for (std::size_t v = 1; v < n; ++v) edges.push_back({rng.index(v), v, rng.uniform(0.2, 2.0)});
  for (std::size_t e = 0; e < n; ++e) {
    const std::size_t a = rng.index(n), b = rng.index(n);
    if (a != b) edges.push_back({a, b, rng.uniform(0.2, 2.0)});
  }
  return build_graph_space(edges, n);
}

inline ScalarField random_field(Rng& rng, std::size_t n, double scale = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = scale * rng.normal();
  return ScalarField(std::move(v));
}

inline ProbMeasure random_measure(Rng& rng, std::size_t n) {
  std::vector<double> w(n);
  for (double& x : w) x = rng.uniform(0.01, 1.0);
  return ProbMeasure::normalized(std::move(w));
}

}  // namespace hopflax
