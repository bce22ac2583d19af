#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hopflax/error.hpp"
#include "hopflax/numeric.hpp"

namespace hopflax {

/// Dense n×n matrix, row-major. Used for distances and general costs.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n, double fill = 0.0)
      : n_(n), data_(n * n, fill) {}

  static SquareMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    SquareMatrix m(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != rows.size()) {
        fail(ErrorKind::ValidationError,
             "matrix is not square: row " + std::to_string(i) + " has " +
                 std::to_string(rows[i].size()) + " entries, expected " +
                 std::to_string(rows.size()),
             {i});
      }
      std::copy(rows[i].begin(), rows[i].end(), m.data_.begin() + i * m.n_);
    }
    return m;
  }

  template <class F>
  static SquareMatrix generate(std::size_t n, F&& entry) {
    SquareMatrix m(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m(i, j) = entry(i, j);
    return m;
  }

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * n_, n_};
  }
  std::span<const double> data() const { return data_; }

  std::vector<std::vector<double>> to_rows() const {
    std::vector<std::vector<double>> rows(n_);
    for (std::size_t i = 0; i < n_; ++i) rows[i].assign(row(i).begin(), row(i).end());
    return rows;
  }

  friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Real-valued function on the points of a finite space. Entries are finite.
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(std::vector<double> values) : values_(std::move(values)) {
    for (std::size_t i = 0; i < values_.size(); ++i) check_finite(i, values_[i]);
  }
  static ScalarField constant(std::size_t n, double c) {
    return ScalarField(std::vector<double>(n, c));
  }

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  void set(std::size_t i, double v) {
    check_finite(i, v);
    values_[i] = v;
  }
  std::span<const double> values() const { return values_; }
  const std::vector<double>& vector() const { return values_; }
  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }

  double max() const { return *std::max_element(values_.begin(), values_.end()); }
  double min() const { return *std::min_element(values_.begin(), values_.end()); }
  double oscillation() const { return values_.empty() ? 0.0 : max() - min(); }

  ScalarField operator-() const {
    ScalarField out = *this;
    for (double& v : out.values_) v = -v;
    return out;
  }
  ScalarField scaled(double k) const {
    ScalarField out = *this;
    for (double& v : out.values_) v *= k;
    return out;
  }

  friend bool operator==(const ScalarField&, const ScalarField&) = default;

 private:
  static void check_finite(std::size_t i, double v) {
    if (!std::isfinite(v))
      fail(ErrorKind::ValidationError,
           "field value at index " + std::to_string(i) + " is not finite", {i});
  }

  std::vector<double> values_;
};

struct SlopeRadiusPolicy {
  enum class Kind { nearest, fixed };
  Kind kind = Kind::nearest;
  double radius = 0.0;

  static SlopeRadiusPolicy nearest() { return {}; }
  static SlopeRadiusPolicy fixed(double r) { return {Kind::fixed, r}; }
};

struct WeightedEdge {
  std::size_t from = 0;
  std::size_t to = 0;
  double weight = 0.0;
};

/// Finite metric space with validated distances and, per point, the slope
/// neighbourhood {y : 0 < d(x,y) <= slope_radius(x)} over which discrete
/// slopes are taken. Immutable after construction.
class MetricSpace {
 public:
  enum class Origin { matrix, grid, graph };

  std::size_t size() const { return n_; }
  double dist(std::size_t x, std::size_t y) const { return dist_(x, y); }
  const SquareMatrix& distances() const { return dist_; }
  double slope_radius(std::size_t x) const { return slope_radius_[x]; }
  std::span<const double> slope_radii() const { return slope_radius_; }
  std::span<const std::size_t> neighbors(std::size_t x) const { return neighbors_[x]; }
  std::optional<double> geodesic_mesh() const { return mesh_; }
  Origin origin() const { return origin_; }

  /// Lattice coordinates for grid spaces (empty otherwise).
  const std::vector<std::vector<double>>& coordinates() const { return coords_; }
  int grid_dimension() const { return grid_dimension_; }
  std::size_t grid_points_per_axis() const { return grid_points_; }
  double grid_side_length() const { return grid_side_; }
  const std::vector<WeightedEdge>& graph_edges() const { return edges_; }

  double diameter() const {
    double d = 0.0;
    for (double v : dist_.data()) d = std::max(d, v);
    return d;
  }
  double min_positive_distance(std::size_t x) const {
    double m = kInf;
    for (std::size_t y = 0; y < n_; ++y)
      if (y != x) m = std::min(m, dist_(x, y));
    return m;
  }

 private:
  friend MetricSpace build_matrix_space(SquareMatrix, SlopeRadiusPolicy);
  friend MetricSpace build_grid_space(int, std::size_t, double);
  friend MetricSpace build_graph_space(const std::vector<WeightedEdge>&, std::size_t);

  void assign_slope_radii(SlopeRadiusPolicy policy) {
    slope_radius_.assign(n_, 1.0);
    for (std::size_t x = 0; x < n_; ++x) {
      if (n_ == 1) break;
      const double nearest = min_positive_distance(x);
      if (policy.kind == SlopeRadiusPolicy::Kind::nearest) {
        slope_radius_[x] = nearest;
      } else {
        if (!(policy.radius > 0.0) || !std::isfinite(policy.radius))
          fail(ErrorKind::ValidationError, "fixed slope radius must be positive and finite");
        if (policy.radius < nearest * (1.0 - 1e-12))
          fail(ErrorKind::ValidationError,
               "fixed slope radius " + std::to_string(policy.radius) +
                   " is below the nearest-neighbour distance of point " +
                   std::to_string(x),
               {x});
        slope_radius_[x] = policy.radius;
      }
    }
    build_neighborhoods();
  }

  void build_neighborhoods() {
    neighbors_.assign(n_, {});
    for (std::size_t x = 0; x < n_; ++x) {
      const double r = slope_radius_[x] * (1.0 + 1e-12);
      for (std::size_t y = 0; y < n_; ++y) {
        const double d = dist_(x, y);
        if (y != x && d > 0.0 && d <= r) neighbors_[x].push_back(y);
      }
    }
  }

  std::size_t n_ = 0;
  SquareMatrix dist_;
  std::vector<double> slope_radius_;
  std::vector<std::vector<std::size_t>> neighbors_;
  std::optional<double> mesh_;
  Origin origin_ = Origin::matrix;
  std::vector<std::vector<double>> coords_;
  int grid_dimension_ = 0;
  std::size_t grid_points_ = 0;
  double grid_side_ = 0.0;
  std::vector<WeightedEdge> edges_;
};

inline constexpr double kTriangleTolerance = 1e-12;

/// Validates a distance matrix (finite, zero diagonal, positive symmetric
/// off-diagonal, triangle inequality within 1e-12 absolute).
inline MetricSpace build_matrix_space(SquareMatrix dist,
                                      SlopeRadiusPolicy policy = SlopeRadiusPolicy::nearest()) {
  const std::size_t n = dist.size();
  require(n >= 1, "a metric space needs at least one point");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double d = dist(i, j);
      if (!std::isfinite(d))
        fail(ErrorKind::ValidationError,
             "dist(" + std::to_string(i) + "," + std::to_string(j) + ") is not finite", {i, j});
      if (d < 0.0)
        fail(ErrorKind::NegativeDistance,
             "dist(" + std::to_string(i) + "," + std::to_string(j) + ") = " + std::to_string(d),
             {i, j});
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (dist(i, i) != 0.0)
      fail(ErrorKind::ValidationError,
           "dist(" + std::to_string(i) + "," + std::to_string(i) + ") must be 0", {i, i});
    for (std::size_t j = i + 1; j < n; ++j) {
      if (dist(i, j) != dist(j, i))
        fail(ErrorKind::AsymmetricDistance,
             "dist(" + std::to_string(i) + "," + std::to_string(j) + ") != dist(" +
                 std::to_string(j) + "," + std::to_string(i) + ")",
             {i, j});
      if (dist(i, j) == 0.0)
        fail(ErrorKind::ValidationError,
             "distinct points " + std::to_string(i) + " and " + std::to_string(j) +
                 " are at distance 0",
             {i, j});
    }
  }
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t z = 0; z < n; ++z)
        if (dist(x, z) > dist(x, y) + dist(y, z) + kTriangleTolerance)
          fail(ErrorKind::TriangleViolation,
               "dist(" + std::to_string(x) + "," + std::to_string(z) + ") exceeds dist(" +
                   std::to_string(x) + "," + std::to_string(y) + ") + dist(" +
                   std::to_string(y) + "," + std::to_string(z) + ")",
               {x, y, z});

  MetricSpace space;
  space.n_ = n;
  space.dist_ = std::move(dist);
  space.origin_ = MetricSpace::Origin::matrix;
  space.assign_slope_radii(policy);
  return space;
}

/// Lattice nodes of [0, side]^dimension with Euclidean distances. Point
/// index is i*N + j for coordinates (i*mesh, j*mesh) in 2-D.
inline MetricSpace build_grid_space(int dimension, std::size_t points_per_axis,
                                    double side_length) {
  if (dimension != 1 && dimension != 2)
    fail(ErrorKind::ValidationError, "grid dimension must be 1 or 2");
  if (points_per_axis < 2)
    fail(ErrorKind::ValidationError, "grid needs at least 2 points per axis");
  if (!(side_length > 0.0) || !std::isfinite(side_length))
    fail(ErrorKind::ValidationError, "grid side length must be positive");

  const double mesh = side_length / static_cast<double>(points_per_axis - 1);
  std::vector<std::vector<double>> coords;
  if (dimension == 1) {
    for (std::size_t i = 0; i < points_per_axis; ++i)
      coords.push_back({static_cast<double>(i) * mesh});
  } else {
    for (std::size_t i = 0; i < points_per_axis; ++i)
      for (std::size_t j = 0; j < points_per_axis; ++j)
        coords.push_back({static_cast<double>(i) * mesh, static_cast<double>(j) * mesh});
  }
  const std::size_t n = coords.size();
  SquareMatrix dist(n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      double d = 0.0;
      if (dimension == 1) {
        d = std::abs(coords[a][0] - coords[b][0]);
      } else {
        d = std::hypot(coords[a][0] - coords[b][0], coords[a][1] - coords[b][1]);
      }
      dist(a, b) = d;
      dist(b, a) = d;
    }
  }

  MetricSpace space;
  space.n_ = n;
  space.dist_ = std::move(dist);
  space.origin_ = MetricSpace::Origin::grid;
  space.mesh_ = mesh;
  space.coords_ = std::move(coords);
  space.grid_dimension_ = dimension;
  space.grid_points_ = points_per_axis;
  space.grid_side_ = side_length;
  space.slope_radius_.assign(n, 1.5 * mesh);
  space.build_neighborhoods();
  return space;
}

/// Shortest-path metric of a connected weighted graph.
inline MetricSpace build_graph_space(const std::vector<WeightedEdge>& edges, std::size_t n) {
  require(n >= 1, "a graph space needs at least one vertex");
  std::vector<std::vector<std::pair<std::size_t, double>>> adjacency(n);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto& edge = edges[e];
    if (edge.from >= n || edge.to >= n)
      fail(ErrorKind::ValidationError,
           "edge " + std::to_string(e) + " references a vertex outside [0, n)", {e});
    if (!(edge.weight > 0.0) || !std::isfinite(edge.weight))
      fail(ErrorKind::ValidationError,
           "edge " + std::to_string(e) + " must have a positive finite weight", {e});
    if (edge.from == edge.to) continue;
    adjacency[edge.from].emplace_back(edge.to, edge.weight);
    adjacency[edge.to].emplace_back(edge.from, edge.weight);
  }

  // Connected components first so the error can list them.
  std::vector<std::size_t> component(n, n);
  std::vector<std::vector<std::size_t>> components;
  for (std::size_t s = 0; s < n; ++s) {
    if (component[s] != n) continue;
    components.emplace_back();
    std::vector<std::size_t> stack{s};
    component[s] = components.size() - 1;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      components.back().push_back(v);
      for (auto [w, _] : adjacency[v]) {
        if (component[w] == n) {
          component[w] = components.size() - 1;
          stack.push_back(w);
        }
      }
    }
  }
  if (components.size() > 1) {
    std::ostringstream msg;
    msg << "graph has " << components.size() << " components:";
    for (auto& c : components) {
      std::sort(c.begin(), c.end());
      msg << " {";
      for (std::size_t k = 0; k < c.size(); ++k) msg << (k ? "," : "") << c[k];
      msg << "}";
    }
    std::vector<std::size_t> representatives;
    for (const auto& c : components) representatives.push_back(c.front());
    fail(ErrorKind::DisconnectedGraph, msg.str(), representatives);
  }

  SquareMatrix dist(n, kInf);
  using Item = std::pair<double, std::size_t>;
  for (std::size_t s = 0; s < n; ++s) {
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist(s, s) = 0.0;
    heap.emplace(0.0, s);
    while (!heap.empty()) {
      auto [d, v] = heap.top();
      heap.pop();
      if (d > dist(s, v)) continue;
      for (auto [w, weight] : adjacency[v]) {
        const double nd = d + weight;
        if (nd < dist(s, w)) {
          dist(s, w) = nd;
          heap.emplace(nd, w);
        }
      }
    }
  }
  // Summation order can differ between the two directions.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = std::min(dist(i, j), dist(j, i));
      dist(i, j) = d;
      dist(j, i) = d;
    }

  MetricSpace space;
  space.n_ = n;
  space.dist_ = std::move(dist);
  space.origin_ = MetricSpace::Origin::graph;
  space.edges_ = edges;
  space.assign_slope_radii(SlopeRadiusPolicy::nearest());
  return space;
}

inline void require_field(const MetricSpace& space, const ScalarField& f,
                          const char* what = "field") {
  if (f.size() != space.size())
    fail(ErrorKind::ValidationError,
         std::string(what) + " has " + std::to_string(f.size()) +
             " values but the space has " + std::to_string(space.size()) + " points");
}

}  // namespace hopflax
