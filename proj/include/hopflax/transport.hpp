#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "hopflax/cost_functions.hpp"
#include "hopflax/hopf_lax.hpp"
#include "hopflax/measures.hpp"
#include "hopflax/metric_space.hpp"

namespace hopflax {

/// Optimal coupling with the dual potentials that certify it:
/// u_i + v_j <= c_ij everywhere, with equality on the support of pi.
struct TransportPlan {
  SquareMatrix pi;
  double cost = 0.0;
  std::vector<double> u;
  std::vector<double> v;
  double dual_value = 0.0;
  double duality_gap = 0.0;
  std::size_t pivots = 0;
};

namespace detail {

/// Transportation simplex on a spanning-tree basis. Pricing is Dantzig
/// (most negative reduced cost, lowest index on ties) and switches to
/// Bland's rule during long runs of degenerate pivots, which rules out
/// cycling. The leaving cell is the blocking cell of lowest index.
class TransportSimplex {
 public:
  TransportSimplex(const std::vector<std::vector<double>>& cost, std::vector<double> supply,
                   std::vector<double> demand)
      : c_(cost), a_(std::move(supply)), b_(std::move(demand)), m_(a_.size()), k_(b_.size()) {
    double cmax = 0.0;
    for (const auto& row : c_)
      for (double v : row) cmax = std::max(cmax, std::abs(v));
    eps_ = 1e-12 * (1.0 + cmax);
  }

  void solve() {
    northwest_corner();
    compute_potentials();
    std::size_t degenerate_run = 0;
    const std::size_t bland_after = 2 * (m_ + k_);
    for (;;) {
      const bool bland = degenerate_run >= bland_after;
      std::size_t ei = 0, ej = 0;
      if (!select_entering(bland, ei, ej)) break;
      const bool moved = pivot(ei, ej);
      degenerate_run = moved ? 0 : degenerate_run + 1;
      ++pivots_;
      compute_potentials();
    }
  }

  double flow(std::size_t i, std::size_t j) const {
    for (const auto& cell : cells_)
      if (cell.i == i && cell.j == j) return cell.x;
    return 0.0;
  }
  const std::vector<double>& u() const { return u_; }
  const std::vector<double>& v() const { return v_; }
  std::size_t pivots() const { return pivots_; }

  struct Cell {
    std::size_t i, j;
    double x;
  };
  const std::vector<Cell>& cells() const { return cells_; }

 private:
  std::size_t col_node(std::size_t j) const { return m_ + j; }

  void northwest_corner() {
    std::vector<double> ra = a_, rb = b_;
    std::size_t i = 0, j = 0;
    for (;;) {
      const double x = std::min(ra[i], rb[j]);
      const bool row_done = ra[i] <= rb[j];
      cells_.push_back({i, j, std::max(0.0, x)});
      ra[i] -= x;
      rb[j] -= x;
      if (i == m_ - 1 && j == k_ - 1) break;
      if (j == k_ - 1 || (row_done && i < m_ - 1)) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  void build_adjacency() {
    adj_.assign(m_ + k_, {});
    for (std::size_t e = 0; e < cells_.size(); ++e) {
      adj_[cells_[e].i].push_back(e);
      adj_[col_node(cells_[e].j)].push_back(e);
    }
  }

  void compute_potentials() {
    build_adjacency();
    const std::size_t nodes = m_ + k_;
    u_.assign(m_, 0.0);
    v_.assign(k_, 0.0);
    parent_edge_.assign(nodes, kNone);
    depth_.assign(nodes, kNone);
    std::vector<std::size_t> queue{0};
    depth_[0] = 0;
    for (std::size_t q = 0; q < queue.size(); ++q) {
      const std::size_t node = queue[q];
      for (std::size_t e : adj_[node]) {
        const Cell& cell = cells_[e];
        const std::size_t other = node < m_ ? col_node(cell.j) : cell.i;
        if (depth_[other] != kNone) continue;
        depth_[other] = depth_[node] + 1;
        parent_edge_[other] = e;
        if (node < m_) {
          v_[cell.j] = c_[cell.i][cell.j] - u_[cell.i];
        } else {
          u_[cell.i] = c_[cell.i][cell.j] - v_[cell.j];
        }
        queue.push_back(other);
      }
    }
    if (queue.size() != nodes) fail(ErrorKind::Internal, "transport basis is not a spanning tree");
  }

  bool select_entering(bool bland, std::size_t& ei, std::size_t& ej) const {
    double best = -eps_;
    bool found = false;
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < k_; ++j) {
        const double rc = c_[i][j] - u_[i] - v_[j];
        if (rc < best) {
          ei = i;
          ej = j;
          found = true;
          if (bland) return true;
          best = rc;
        }
      }
    }
    return found;
  }

  std::size_t other_end(std::size_t e, std::size_t node) const {
    return node < m_ ? col_node(cells_[e].j) : cells_[e].i;
  }

  // Returns whether the pivot moved positive mass.
  bool pivot(std::size_t ei, std::size_t ej) {
    // Tree path from the entering column back to the entering row.
    std::vector<std::size_t> from_col, from_row;
    std::size_t a = col_node(ej), b = ei;
    while (depth_[a] > depth_[b]) {
      from_col.push_back(parent_edge_[a]);
      a = other_end(parent_edge_[a], a);
    }
    while (depth_[b] > depth_[a]) {
      from_row.push_back(parent_edge_[b]);
      b = other_end(parent_edge_[b], b);
    }
    while (a != b) {
      from_col.push_back(parent_edge_[a]);
      a = other_end(parent_edge_[a], a);
      from_row.push_back(parent_edge_[b]);
      b = other_end(parent_edge_[b], b);
    }
    std::vector<std::size_t> path = std::move(from_col);
    path.insert(path.end(), from_row.rbegin(), from_row.rend());

    // Odd positions (0, 2, ...) lose mass.
    std::size_t leave = kNone;
    double theta = kInf;
    for (std::size_t p = 0; p < path.size(); p += 2) {
      const Cell& cell = cells_[path[p]];
      const double x = cell.x;
      const std::size_t idx = cell.i * k_ + cell.j;
      if (x < theta || (x == theta && idx < cells_[leave].i * k_ + cells_[leave].j)) {
        theta = x;
        leave = path[p];
      }
    }
    for (std::size_t p = 0; p < path.size(); ++p) {
      Cell& cell = cells_[path[p]];
      cell.x = p % 2 == 0 ? std::max(0.0, cell.x - theta) : cell.x + theta;
    }
    cells_[leave] = {ei, ej, theta};
    return theta > 0.0;
  }

  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  std::vector<std::vector<double>> c_;
  std::vector<double> a_, b_;
  std::size_t m_, k_;
  double eps_ = 0.0;
  std::vector<Cell> cells_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<std::size_t> parent_edge_, depth_;
  std::vector<double> u_, v_;
  std::size_t pivots_ = 0;
};

}  // namespace detail

/// Exact optimal transport cost between nu1 (rows) and nu2 (columns).
/// Masses need not be normalized but must have equal totals within 1e-9.
inline TransportPlan ot_cost(const SquareMatrix& c, std::span<const double> nu1,
                             std::span<const double> nu2) {
  const std::size_t n = c.size();
  require(nu1.size() == n && nu2.size() == n, "measures and cost matrix sizes differ");
  for (std::size_t i = 0; i < n; ++i)
    if (!(nu1[i] >= 0.0) || !(nu2[i] >= 0.0) || !std::isfinite(nu1[i]) || !std::isfinite(nu2[i]))
      fail(ErrorKind::ValidationError, "masses must be finite and nonnegative", {i});
  auto charges = [](double w) { return w > kNegligibleWeight; };
  for (double v : c.data())
    if (!std::isfinite(v)) fail(ErrorKind::ValidationError, "cost matrix has a non-finite entry");
  const double s1 = compensated_sum(nu1);
  const double s2 = compensated_sum(nu2);
  if (std::abs(s1 - s2) > 1e-9)
    fail(ErrorKind::InfeasibleMarginals, "marginal masses differ: " + std::to_string(s1) +
                                             " vs " + std::to_string(s2));

  std::vector<std::size_t> rows, cols;
  for (std::size_t i = 0; i < n; ++i) {
    if (charges(nu1[i])) rows.push_back(i);
    if (charges(nu2[i])) cols.push_back(i);
  }
  if (rows.empty() || cols.empty()) {
    TransportPlan empty;
    empty.pi = SquareMatrix(n);
    empty.u.assign(n, 0.0);
    empty.v.assign(n, 0.0);
    return empty;
  }
  std::vector<std::vector<double>> sub(rows.size(), std::vector<double>(cols.size()));
  std::vector<double> a(rows.size()), b(cols.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    a[r] = nu1[rows[r]];
    for (std::size_t q = 0; q < cols.size(); ++q) sub[r][q] = c(rows[r], cols[q]);
  }
  for (std::size_t q = 0; q < cols.size(); ++q) b[q] = nu2[cols[q]];

  detail::TransportSimplex simplex(sub, a, b);
  simplex.solve();

  TransportPlan plan;
  plan.pi = SquareMatrix(n);
  for (const auto& cell : simplex.cells())
    if (cell.x > 0.0) plan.pi(rows[cell.i], cols[cell.j]) += cell.x;
  plan.pivots = simplex.pivots();

  std::vector<char> row_kept(n, 0), col_kept(n, 0);
  plan.u.assign(n, 0.0);
  plan.v.assign(n, 0.0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    plan.u[rows[r]] = simplex.u()[r];
    row_kept[rows[r]] = 1;
  }
  for (std::size_t q = 0; q < cols.size(); ++q) {
    plan.v[cols[q]] = simplex.v()[q];
    col_kept[cols[q]] = 1;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (row_kept[i]) continue;
    double best = kInf;
    for (std::size_t j : cols) best = std::min(best, c(i, j) - plan.v[j]);
    plan.u[i] = best;
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (col_kept[j]) continue;
    double best = kInf;
    for (std::size_t i = 0; i < n; ++i) best = std::min(best, c(i, j) - plan.u[i]);
    plan.v[j] = best;
  }

  CompensatedSum primal, dual;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (plan.pi(i, j) > 0.0) primal += plan.pi(i, j) * c(i, j);
  for (std::size_t i = 0; i < n; ++i) {
    if (charges(nu1[i])) dual += nu1[i] * plan.u[i];
    if (charges(nu2[i])) dual += nu2[i] * plan.v[i];
  }
  plan.cost = primal.value();
  plan.dual_value = dual.value();
  plan.duality_gap = plan.cost - plan.dual_value;
  return plan;
}

inline TransportPlan ot_cost(const SquareMatrix& c, const ProbMeasure& nu1,
                             const ProbMeasure& nu2) {
  return ot_cost(c, nu1.weights(), nu2.weights());
}

inline TransportPlan ot_cost(const MetricSpace& space, const CostFunction& cost,
                             const ProbMeasure& nu1, const ProbMeasure& nu2) {
  require_measure(space, nu1, "first measure");
  require_measure(space, nu2, "second measure");
  return ot_cost(cost_matrix(space, cost), nu1, nu2);
}

/// Quantile coupling cost on the line for |x − y|^p / p.
inline double ot_oracle_1d(const std::vector<double>& positions, double p,
                           const ProbMeasure& nu1, const ProbMeasure& nu2) {
  const std::size_t n = positions.size();
  require(nu1.size() == n && nu2.size() == n, "measures and positions sizes differ");
  for (std::size_t i = 1; i < n; ++i)
    require(positions[i] > positions[i - 1], "positions must be strictly increasing");
  std::vector<double> ra(nu1.weights().begin(), nu1.weights().end());
  std::vector<double> rb(nu2.weights().begin(), nu2.weights().end());
  CompensatedSum total;
  std::size_t i = 0, j = 0;
  while (i < n && j < n) {
    if (ra[i] <= kNegligibleWeight) {
      ++i;
      continue;
    }
    if (rb[j] <= kNegligibleWeight) {
      ++j;
      continue;
    }
    const double x = std::min(ra[i], rb[j]);
    total += x * std::pow(std::abs(positions[i] - positions[j]), p) / p;
    ra[i] -= x;
    rb[j] -= x;
    if (ra[i] <= rb[j]) {
      ra[i] = 0.0;
    } else {
      rb[j] = 0.0;
    }
  }
  return total.value();
}

/// log ∫ e^{Q₁f/C} dμ − (1/C) ∫ f dμ.
inline double bobkov_gotze_gap(const MetricSpace& space, const CostFunction& cost,
                               const ProbMeasure& mu, double C, const ScalarField& f) {
  if (!(C > 0.0) || !std::isfinite(C))
    fail(ErrorKind::ParameterOutOfRange, "C must be positive and finite");
  require_measure(space, mu);
  require_field(space, f);
  const ScalarField q1 = inf_convolution(space, cost, f, 1.0);
  std::vector<double> scaled(q1.size());
  for (std::size_t i = 0; i < q1.size(); ++i) scaled[i] = q1[i] / C;
  const double lse = log_k_norm_exp(mu, scaled, 1.0);
  return lse - integrate(mu, f) / C;
}

}  // namespace hopflax
