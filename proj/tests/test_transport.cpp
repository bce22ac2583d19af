#include <gtest/gtest.h>

#include <chrono>
#include <cmath>

#include "hopflax/transport.hpp"
#include "test_util.hpp"

using namespace hopflax;

namespace {

ProbMeasure sparse_measure(Rng& rng, std::size_t n, double zero_prob = 0.0) {
  std::vector<double> w(n);
  for (double& x : w) x = rng.uniform() < zero_prob ? 0.0 : rng.uniform(0.01, 1.0);
  if (*std::max_element(w.begin(), w.end()) == 0.0) w[0] = 1.0;
  return ProbMeasure::normalized(w);
}

void expect_valid_plan(const TransportPlan& plan, const SquareMatrix& c, const ProbMeasure& a,
                       const ProbMeasure& b) {
  const std::size_t n = c.size();
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0, col = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      EXPECT_GE(plan.pi(i, j), 0.0);
      row += plan.pi(i, j);
      col += plan.pi(j, i);
      EXPECT_LE(plan.u[i] + plan.v[j], c(i, j) + 1e-9);
    }
    EXPECT_NEAR(row, a[i], 1e-10);
    EXPECT_NEAR(col, b[i], 1e-10);
  }
  EXPECT_LE(std::abs(plan.duality_gap), 1e-9);
}

// Exhaustive search over couplings whose entries are multiples of 1/20.
// The last entry of each row and the whole last row are determined by the
// marginals, so only the free coordinates are enumerated.
double brute_force(const SquareMatrix& c, const std::vector<int>& a, const std::vector<int>& b) {
  const std::size_t n = a.size();
  double best = kInf;
  std::vector<int> pi(n * n, 0);
  std::vector<int> col(n, 0);
  auto rec = [&](auto&& self, std::size_t i, std::size_t j, int row_used) -> void {
    if (i == n - 1) {
      double cost = 0.0;
      for (std::size_t q = 0; q < n; ++q) {
        const int rest = b[q] - col[q];
        if (rest < 0) return;
        pi[i * n + q] = rest;
      }
      int last_row = 0;
      for (std::size_t q = 0; q < n; ++q) last_row += pi[i * n + q];
      if (last_row != a[i]) return;
      for (std::size_t k = 0; k < n * n; ++k) cost += pi[k] / 20.0 * c(k / n, k % n);
      best = std::min(best, cost);
      return;
    }
    if (j == n - 1) {
      const int v = a[i] - row_used;
      if (col[j] + v > b[j]) return;
      pi[i * n + j] = v;
      col[j] += v;
      self(self, i + 1, 0, 0);
      col[j] -= v;
      return;
    }
    for (int v = 0; v + row_used <= a[i] && col[j] + v <= b[j]; ++v) {
      pi[i * n + j] = v;
      col[j] += v;
      self(self, i, j + 1, row_used + v);
      col[j] -= v;
    }
  };
  rec(rec, 0, 0, 0);
  return best;
}

}  // namespace

TEST(Transport, Examples) {
  auto s = tu::two_point_space();
  auto quad = CostFunction::power(2);
  ProbMeasure a({1.0, 0.0}), b({0.0, 1.0});
  EXPECT_EQ(ot_cost(s, quad, a, a).cost, 0.0);
  auto c1 = SquareMatrix::from_rows({{0, 1}, {1, 0}});
  EXPECT_DOUBLE_EQ(ot_cost(c1, a, b).cost, 1.0);
  auto line = build_matrix_space(SquareMatrix::from_rows({{0, 1, 2}, {1, 0, 1}, {2, 1, 0}}));
  ProbMeasure n1({0.5, 0.5, 0.0}), n2({0.0, 0.5, 0.5});
  EXPECT_DOUBLE_EQ(ot_cost(line, quad, n1, n2).cost, 0.5);
  EXPECT_DOUBLE_EQ(ot_oracle_1d({0, 1, 2}, 2.0, n1, n2), 0.5);
  EXPECT_NEAR(ot_oracle_1d({0, 1}, 2.0, ProbMeasure({0.7, 0.3}), ProbMeasure({0.3, 0.7})), 0.2,
              1e-15);
  EXPECT_EQ(ot_oracle_1d({0, 1, 2}, 2.0, n1, n1), 0.0);
}

TEST(Transport, InfeasibleMarginals) {
  auto c = SquareMatrix::from_rows({{0, 1}, {1, 0}});
  const std::vector<double> a{1.0, 0.0}, b{0.5, 0.5 + 1e-8}, close{0.5, 0.5 + 1e-10};
  try {
    ot_cost(c, a, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InfeasibleMarginals);
  }
  EXPECT_NEAR(ot_cost(c, a, close).cost, 0.5, 1e-9);
}

TEST(Transport, MatchesQuantileOracle) {
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.index(49);
    std::vector<double> pos(n);
    double x = 0.0;
    for (double& v : pos) v = (x += rng.uniform(0.05, 1.0));
    auto space = build_matrix_space(SquareMatrix::generate(
        n, [&](std::size_t i, std::size_t j) { return std::abs(pos[i] - pos[j]); }));
    const double p = trial % 3 == 0 ? 1.0 : (trial % 3 == 1 ? 2.0 : 3.0);
    auto a = sparse_measure(rng, n, 0.2);
    auto b = sparse_measure(rng, n, 0.2);
    auto c = cost_matrix(space, CostFunction::power(p));
    auto plan = ot_cost(c, a, b);
    EXPECT_NEAR(plan.cost, ot_oracle_1d(pos, p, a, b), 1e-9) << "trial " << trial;
    expect_valid_plan(plan, c, a, b);
  }
}

TEST(Transport, SymmetricInArguments) {
  Rng rng(18);
  for (int trial = 0; trial < 20; ++trial) {
    auto s = tu::random_graph_space(rng, 20);
    auto c = cost_matrix(s, CostFunction::power(2));
    auto a = sparse_measure(rng, 20), b = sparse_measure(rng, 20);
    EXPECT_NEAR(ot_cost(c, a, b).cost, ot_cost(c, b, a).cost, 1e-12);
  }
}

TEST(Transport, BruteForceSmallInstances) {
  Rng rng(19);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + trial % 2;
    auto draw = [&] {
      std::vector<int> w(n, 0);
      for (int k = 0; k < 20; ++k) ++w[rng.index(n)];
      return w;
    };
    auto ia = draw(), ib = draw();
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = ia[i] / 20.0;
      b[i] = ib[i] / 20.0;
    }
    auto s = tu::random_euclidean_space(rng, n);
    auto c = cost_matrix(s, CostFunction::power(2));
    auto A = ProbMeasure::normalized(a), B = ProbMeasure::normalized(b);
    EXPECT_NEAR(ot_cost(c, A, B).cost, brute_force(c, ia, ib), 1e-6);
  }
}

TEST(Transport, DegenerateMeasuresAndPotentials) {
  Rng rng(20);
  for (int trial = 0; trial < 30; ++trial) {
    auto s = tu::random_euclidean_space(rng, 15);
    auto c = cost_matrix(s, CostFunction::power(2));
    auto a = sparse_measure(rng, 15, 0.5), b = sparse_measure(rng, 15, 0.5);
    expect_valid_plan(ot_cost(c, a, b), c, a, b);
  }
  auto s = tu::random_euclidean_space(rng, 6);
  auto c = cost_matrix(s, CostFunction::power(2));
  auto pm = ProbMeasure::point_mass(6, 2);
  auto plan = ot_cost(c, pm, pm);
  EXPECT_EQ(plan.cost, 0.0);
  EXPECT_EQ(plan.pi(2, 2), 1.0);
}

TEST(Transport, LargeInstanceIsFast) {
  Rng rng(23);
  const std::size_t n = 300;
  auto s = tu::random_euclidean_space(rng, n);
  auto c = cost_matrix(s, CostFunction::power(2));
  auto a = sparse_measure(rng, n), b = sparse_measure(rng, n);
  const auto start = std::chrono::steady_clock::now();
  auto plan = ot_cost(c, a, b);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_LT(secs, 1.0) << plan.pivots << " pivots";
  expect_valid_plan(plan, c, a, b);
}

TEST(Transport, BobkovGotzeGap) {
  auto s = tu::two_point_space();
  auto quad = CostFunction::power(2);
  auto u = ProbMeasure::uniform(2);
  EXPECT_EQ(bobkov_gotze_gap(s, quad, u, 1.0, ScalarField::constant(2, 3.0)), 0.0);
  EXPECT_LT(bobkov_gotze_gap(s, quad, u, 100.0, ScalarField({0.0, 1.0})), 0.0);
}
