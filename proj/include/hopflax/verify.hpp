#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "hopflax/constants.hpp"
#include "hopflax/convexity.hpp"
#include "hopflax/cost_functions.hpp"
#include "hopflax/error.hpp"
#include "hopflax/hopf_lax.hpp"
#include "hopflax/inequalities.hpp"
#include "hopflax/measures.hpp"
#include "hopflax/numeric.hpp"
#include "hopflax/sampling.hpp"
#include "hopflax/transport.hpp"

namespace hopflax {

/// Named numerical tolerances with defaults; overrides are remembered so
/// reports can echo them.
class Tolerances {
 public:
  Tolerances()
      : values_{{"tie", kDefaultTieTol}, {"fd", 1e-4},   {"exact", 1e-9}, {"idempotence", 1e-12},
                {"ot", 1e-9},            {"ode", 1e-5},  {"kappa", 1e-6}, {"theta", 1e-10}} {}

  double operator[](const std::string& name) const {
    auto it = values_.find(name);
    if (it == values_.end()) fail(ErrorKind::ValidationError, "unknown tolerance \"" + name + "\"");
    return it->second;
  }

  void set(const std::string& name, double value) {
    if (!values_.count(name))
      fail(ErrorKind::ValidationError, "unknown tolerance \"" + name + "\"; known: " + known());
    if (!(value > 0.0) || !std::isfinite(value))
      fail(ErrorKind::ValidationError, "tolerance " + name + " must be positive and finite");
    values_[name] = value;
    overrides_[name] = value;
  }

  /// Parses NAME=VALUE.
  void set_from_string(const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0)
      fail(ErrorKind::ValidationError, "--tol expects NAME=VALUE, got \"" + spec + "\"");
    const std::string name = spec.substr(0, eq), text = spec.substr(eq + 1);
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || *end != '\0')
      fail(ErrorKind::ValidationError, "tolerance value \"" + text + "\" is not a number");
    set(name, v);
  }

  const std::map<std::string, double>& overrides() const { return overrides_; }

  std::string known() const {
    std::string s;
    for (const auto& [k, v] : values_) s += (s.empty() ? "" : ", ") + k;
    return s;
  }

 private:
  std::map<std::string, double> values_;
  std::map<std::string, double> overrides_;
};

enum class VerifyScale { smoke, full };

struct VerifyOptions {
  VerifyScale scale = VerifyScale::smoke;
  std::uint64_t seed = 0;
  bool perturbed_beta = false;  // mutation canary for the time-derivative row
  Tolerances tol;
};

/// One invariant. Audit rows report but never gate.
struct VerifyRow {
  std::string label;
  std::string what;
  bool passed = false;
  double slack = 0.0;
  bool audit = false;
  std::size_t cases = 0;
};

struct VerifySummary {
  std::vector<VerifyRow> rows;

  const VerifyRow* first_failure() const {
    for (const auto& r : rows)
      if (!r.audit && !r.passed) return &r;
    return nullptr;
  }
  bool all_passed() const { return first_failure() == nullptr; }
  const VerifyRow* find(const std::string& label) const {
    for (const auto& r : rows)
      if (r.label == label) return &r;
    return nullptr;
  }
};

namespace detail {

struct Worst {
  double slack = kInf;
  bool ok = true;
  std::size_t cases = 0;
  void take(double s, bool pass) {
    slack = std::min(slack, s);
    ok = ok && pass;
    ++cases;
  }
  void take(double s) { take(s, s >= 0.0); }
};

inline VerifyRow make_row(std::string label, std::string what, const Worst& w, bool audit = false) {
  return {std::move(label), std::move(what), w.ok, w.slack, audit, w.cases};
}

inline MetricSpace random_space(Rng& rng, std::size_t n) {
  return rng.uniform() < 0.5 ? random_euclidean_space(rng, n) : random_graph_space(rng, n);
}

inline CostFunction random_cost(Rng& rng) {
  const double u = rng.uniform();
  if (u < 0.7) return CostFunction::power(rng.uniform(1.5, 4.0)).scaled(rng.log_uniform(0.2, 5.0));
  return CostFunction::linear_capped(rng.uniform(0.5, 2.0));
}

// --- constants ----------------------------------------------------------

inline VerifyRow row_kappa2(const VerifyOptions& o) {
  Worst w;
  w.take(o.tol["kappa"] - std::abs(kappa_p(2.0) - std::exp(2.0)));
  return make_row("kappa-two-is-e-squared", "kappa_p(2) against e^2", w);
}

inline VerifyRow row_theta2(const VerifyOptions& o) {
  Worst w;
  for (int i = 1; i <= 99; ++i) {
    const double x = i / 100.0;
    w.take(o.tol["theta"] - std::abs(theta_p(x, 2.0) - theta_2_closed_form(x)));
  }
  return make_row("theta-two-closed-form", "generic theta_p minimizer against 4x/(1-x)^2", w);
}

inline VerifyRow row_beta_examples(const VerifyOptions& o) {
  Worst w;
  const double tol = o.tol["exact"];
  w.take(tol - std::abs(beta_p(2.0, 2.0) - 2.0));
  w.take(tol - std::abs(beta_p(8.0, 3.0) - 8.0 / std::pow(2.0 * std::sqrt(2.0) - 1.0, 2.0)));
  w.take(tol - std::abs(beta_p(4.0, 2.0) - 4.0 / 3.0));
  // β_p decreases to 1 at infinity.
  w.take(tol - std::max(0.0, beta_p(1e9, 3.0) - beta_p(1e3, 3.0)));
  return make_row("beta-p-values", "beta_p against hand-computed values", w);
}

inline VerifyRow row_phi_asymptotics(const VerifyOptions&) {
  Worst w;
  for (double p : {2.5, 3.0, 4.0}) {
    w.take(1e-2 - std::abs(phi_p(1.0 - 1e-4, p) - 1.0));
    const double s = 1e-6;
    const double model = std::pow(p, p / (p - 1.0)) * std::pow(s, -(p - 2.0) / (p - 1.0));
    w.take(0.1 - std::abs(phi_p(s, p) / model - 1.0));
  }
  return make_row("phi-endpoint-asymptotics", "phi near 1 and small-s power law", w);
}

inline VerifyRow row_ell_ode(const VerifyOptions& o) {
  Worst w;
  for (double p : {2.0, 2.5, 3.0}) {
    const double a = a_p(p);
    for (int i = 1; i <= 9; ++i) {
      const double t = a + (1.0 - a) * i / 10.0;
      w.take(o.tol["ode"] - std::abs(ell_ode_residual(p, t)));
    }
  }
  return make_row("ell-schedule-ode", "ell_p solves its defining differential equation", w);
}

// --- Hopf-Lax operators -------------------------------------------------

inline VerifyRow row_time_derivative(const VerifyOptions& o) {
  const bool full = o.scale == VerifyScale::full;
  const int spaces = full ? 50 : 10, fields = full ? 10 : 5, times = full ? 5 : 3;
  const double tol = o.tol["fd"];
  const double hs[] = {1e-3, 1e-4, 1e-5, 1e-6};
  Rng rng(mix_seed(o.seed, 101));
  Worst w;
  for (int s = 0; s < spaces; ++s) {
    const std::size_t n = 5 + rng.index(46);
    const MetricSpace space = random_space(rng, n);
    const CostFunction cost = CostFunction::power(rng.uniform(1.5, 4.0));
    for (int i = 0; i < fields; ++i) {
      const ScalarField f = random_field(rng, n);
      for (int k = 0; k < times; ++k) {
        const double t = rng.log_uniform(0.5, 5.0);
        const ScalarField p0 = sup_convolution(space, cost, f, t);
        std::vector<ScalarField> ph;
        for (double h : hs) ph.push_back(sup_convolution(space, cost, f, t + h));
        for (std::size_t x = 0; x < n; ++x) {
          double b = dP_dt_plus(space, cost, f, t, x, o.tol["tie"]);
          if (o.perturbed_beta) b += 1e-3;
          double prev = kInf;
          bool monotone = true;
          for (std::size_t j = 0; j < ph.size(); ++j) {
            const double err = std::abs((ph[j][x] - p0[x]) / hs[j] - b);
            if (err > prev + 1e-8) monotone = false;
            prev = err;
          }
          w.take(tol - prev, prev <= tol && monotone);
        }
      }
    }
  }
  return make_row("hopf-lax-time-derivative",
                  "right derivative of P_tf equals beta(maxdist/t); forward differences converge "
                  "monotonically",
                  w);
}

/// Concave field 1 − a|x−c|² − b·e^{x₀} on a grid.
inline ScalarField concave_grid_field(const MetricSpace& grid, double a, double b,
                                      const std::vector<double>& centre) {
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& c = grid.coordinates()[i];
    double r2 = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) r2 += (c[k] - centre[k]) * (c[k] - centre[k]);
    v[i] = 1.0 - a * r2 - b * std::exp(c[0]);
  }
  return ScalarField(std::move(v));
}

struct GridHj {
  Worst inequality;
  Worst refinement;
};

inline GridHj grid_hamilton_jacobi(const VerifyOptions& o) {
  const bool full = o.scale == VerifyScale::full;
  Rng rng(mix_seed(o.seed, 102));
  GridHj out;
  for (int dim : {1, 2}) {
    std::vector<std::size_t> levels = dim == 1 ? std::vector<std::size_t>{21, 41, 81}
                                               : std::vector<std::size_t>{9, 17, 33};
    if (!full) levels.pop_back();
    for (double p : {2.0, 3.0}) {
      const CostFunction cost = CostFunction::power(p);
      const double a = rng.uniform(1.0, 3.0), b = rng.uniform(0.0, 1.0);
      std::vector<double> centre(static_cast<std::size_t>(dim));
      for (double& c : centre) c = rng.uniform(0.2, 0.8);
      double previous = kInf;
      for (std::size_t level : levels) {
        const MetricSpace grid = build_grid_space(dim, level, 1.0);
        const ScalarField f = concave_grid_field(grid, a, b, centre);
        double residual = 0.0;
        for (double t : {0.25, 0.5, 1.0}) {
          const ScalarField pt = sup_convolution(grid, cost, f, t);
          for (std::size_t x = 0; x < grid.size(); ++x) {
            const auto set = extremizer_set(grid, cost, f, t, x, o.tol["tie"]);
            const double dmax = extremal_distances(grid, set, x).max;
            const double lhs = cost.beta(dmax / t);
            const double rhs = cost.legendre_dual(slope_plus(grid, pt, x));
            // Moving the discrete maximizer by one slope radius.
            const double tol = cost.beta((dmax + grid.slope_radius(x)) / t) - lhs;
            out.inequality.take(lhs - rhs + tol);
            residual = std::max(residual, std::abs(lhs - rhs));
          }
        }
        if (std::isfinite(previous)) out.refinement.take(previous - residual);
        previous = residual;
      }
    }
  }
  return out;
}

inline VerifyRow row_half_semigroup(const VerifyOptions& o) {
  const int cases = o.scale == VerifyScale::full ? 100 : 20;
  const double tol = o.tol["exact"];
  Rng rng(mix_seed(o.seed, 103));
  Worst w;
  for (int c = 0; c < cases; ++c) {
    const std::size_t n = 2 + rng.index(29);
    const MetricSpace space = random_space(rng, n);
    const CostFunction cost = random_cost(rng);
    const ScalarField f = random_field(rng, n);
    const double t = rng.log_uniform(0.1, 3.0), s = rng.log_uniform(0.1, 3.0);
    const ScalarField q_ts = inf_convolution(space, cost, f, t + s);
    const ScalarField q_t_qs = inf_convolution(space, cost, inf_convolution(space, cost, f, s), t);
    const ScalarField p_ts = sup_convolution(space, cost, f, t + s);
    const ScalarField p_t_ps = sup_convolution(space, cost, sup_convolution(space, cost, f, s), t);
    for (std::size_t x = 0; x < n; ++x) {
      w.take(tol - std::max(0.0, q_ts[x] - q_t_qs[x]));
      w.take(tol - std::max(0.0, p_t_ps[x] - p_ts[x]));
    }
  }
  return make_row("half-semigroup", "Q_{t+s} <= Q_tQ_s and P_{t+s} >= P_tP_s", w);
}

inline VerifyRow row_localization(const VerifyOptions& o) {
  const int cases = o.scale == VerifyScale::full ? 100 : 20;
  Rng rng(mix_seed(o.seed, 104));
  Worst w;
  for (int c = 0; c < cases; ++c) {
    const std::size_t n = 2 + rng.index(29);
    const MetricSpace space = random_space(rng, n);
    const CostFunction cost = CostFunction::power(rng.uniform(1.5, 4.0));
    const ScalarField f = random_field(rng, n);
    const double t = rng.log_uniform(0.05, 3.0), h = 1e-6;
    const double radius = t * cost.inverse(f.oscillation() / t);
    const double lip = cost.beta(cost.inverse(f.oscillation() / t));
    const ScalarField q0 = inf_convolution(space, cost, f, t);
    const ScalarField q1 = inf_convolution(space, cost, f, t + h);
    for (std::size_t x = 0; x < n; ++x) {
      const auto set = minimizer_set(space, cost, f, t, x, o.tol["tie"]);
      const double d = extremal_distances(space, set, x).max;
      w.take(radius * (1.0 + 1e-9) - d);
      const double rate = std::abs(q1[x] - q0[x]) / h;
      w.take(lip * (1.0 + 1e-6) + 1e-6 - rate);
    }
  }
  return make_row("minimizer-localization",
                  "minimizers within t*alpha^-1(osc/t); time-Lipschitz bound on Q_tf", w);
}

// --- c-convexity --------------------------------------------------------

struct ConvexityRows {
  Worst idempotence, inclusion, nonempty, chain;
};

inline ConvexityRows convexity_calculus(const VerifyOptions& o) {
  const int cases = o.scale == VerifyScale::full ? 1000 : 200;
  const double tie = o.tol["tie"];
  Rng rng(mix_seed(o.seed, 105));
  ConvexityRows out;
  for (int k = 0; k < cases; ++k) {
    const std::size_t n = 2 + rng.index(24);
    const MetricSpace space = random_space(rng, n);
    const CostFunction cost = random_cost(rng);
    const SquareMatrix c = cost_matrix(space, cost);
    const ScalarField g = random_field(rng, n, rng.log_uniform(0.1, 5.0));

    const ScalarField once = c_convexify(c, g);
    const ScalarField twice = c_convexify(c, once);
    double dev = 0.0;
    for (std::size_t x = 0; x < n; ++x) dev = std::max(dev, std::abs(once[x] - twice[x]));
    out.idempotence.take(o.tol["idempotence"] - dev);

    const ScalarField f = p_c_transform(c, g);
    const Subdifferential sub = subdifferential(c, f, false, tie);
    const ScalarField qc = q_c_transform(c, f);
    for (std::size_t x = 0; x < n; ++x) {
      const auto m = transform_extremizers(c, g, x, tie);
      for (std::size_t y : m.points)
        out.inclusion.take(qc[y] - c(x, y) - f[x] + tie, sub.contains(x, y));
    }

    const Subdifferential gsub = subdifferential(c, g, false, tie);
    std::size_t smallest = n;
    for (std::size_t x = 0; x < n; ++x) smallest = std::min(smallest, gsub.at(x).size());
    out.nonempty.take(static_cast<double>(smallest), smallest > 0);

    const GradientChain chain = gradient_chain(space, cost, g, tie);
    out.chain.take(chain.exact_slack + o.tol["exact"]);
  }
  return out;
}

/// How far the minus c-gradient is from α'(min_m d) on refining 1-D grids.
inline VerifyRow row_chain_equality_audit(const VerifyOptions& o) {
  Rng rng(mix_seed(o.seed, 106));
  const CostFunction cost = CostFunction::power(2.0);
  Worst w;
  for (std::size_t level : {21u, 41u}) {
    const MetricSpace grid = build_grid_space(1, level, 1.0);
    const ScalarField g = random_field(rng, grid.size(), 0.1);
    const GradientChain chain = gradient_chain(grid, cost, g, o.tol["tie"]);
    double gap = 0.0;
    for (const auto& r : chain.rows) gap = std::max(gap, r.alpha_prime_min_m - r.cgrad_minus);
    w.take(o.tol["exact"] - gap);
  }
  return make_row("gradient-chain-equality", "minus c-gradient equals alpha'(min_m d) on grids", w,
                  true);
}

// --- transport ----------------------------------------------------------

struct TransportRows {
  Worst oracle, duality;
};

inline TransportRows transport_checks(const VerifyOptions& o) {
  const int cases = o.scale == VerifyScale::full ? 200 : 40;
  Rng rng(mix_seed(o.seed, 107));
  TransportRows out;
  for (int k = 0; k < cases; ++k) {
    const std::size_t n = 2 + rng.index(49);
    std::vector<double> pos(n);
    for (double& v : pos) v = rng.uniform(0.0, 3.0);
    std::sort(pos.begin(), pos.end());
    for (std::size_t i = 1; i < n; ++i) pos[i] = std::max(pos[i], pos[i - 1] + 1e-3);
    const double p = std::array<double, 4>{1.0, 1.5, 2.0, 3.0}[rng.index(4)];
    const MetricSpace space = build_matrix_space(SquareMatrix::generate(
        n, [&](std::size_t i, std::size_t j) { return std::abs(pos[i] - pos[j]); }));
    const ProbMeasure a = random_measure(rng, n), b = random_measure(rng, n);
    const TransportPlan plan = ot_cost(cost_matrix(space, CostFunction::power(p)), a, b);
    out.oracle.take(o.tol["ot"] - std::abs(plan.cost - ot_oracle_1d(pos, p, a, b)));
    out.duality.take(o.tol["ot"] - std::abs(plan.duality_gap));
  }
  return out;
}

// --- inequalities -------------------------------------------------------

inline VerifyRow row_kc_convex_comparison(const VerifyOptions& o) {
  const int cases = o.scale == VerifyScale::full ? 500 : 100;
  Rng rng(mix_seed(o.seed, 108));
  Worst w;
  for (int k = 0; k < cases; ++k) {
    const std::size_t n = 2 + rng.index(29);
    const MetricSpace space = random_space(rng, n);
    const double p = std::array<double, 4>{2.0, 2.5, 3.0, 4.0}[rng.index(4)];
    const double K = rng.log_uniform(0.1, 10.0);
    const double lambda = K * (1.0 + rng.log_uniform(1e-3, 10.0));
    const ScalarField g = random_field(rng, n, rng.log_uniform(0.1, 5.0));
    for (double gap : lemma_adieupec_gap(space, p, K, lambda, g)) w.take(gap + o.tol["exact"]);
  }
  return make_row("kc-convex-infimal-gap",
                  "f - Q^lambda f <= K(beta_p(lambda/K)-1)c_p on the subdifferential", w);
}

inline std::vector<std::pair<std::string, MetricSpace>> fixtures() {
  return {{"two-point", two_point_space()}, {"path-5", path_space(5)}};
}

inline VerifyRow row_entropy_derivative(const VerifyOptions& o) {
  const int per_fixture = o.scale == VerifyScale::full ? 100 : 20;
  const CostFunction cost = CostFunction::power(2.0);
  Rng rng(mix_seed(o.seed, 109));
  Worst w;
  for (const auto& [name, space] : fixtures()) {
    const ProbMeasure mu = ProbMeasure::uniform(space.size());
    const double C = estimate_lsi_constant(space, cost, mu, 32, o.seed).constant_estimate * 1.05;
    const auto schedule = make_schedule(ScheduleParams::from_cost(cost, C, C));
    const double h = 1e-6;
    for (int i = 0; i < per_fixture; ++i) {
      const ScalarField f = random_field(rng, space.size());
      for (double t : default_t_grid(C)) {
        const double d = derivative_formula_H(space, cost, mu, schedule, f, t);
        const double fd = (log_norm_of_q(space, cost, mu, f, t + h, schedule(t + h).first) -
                           log_norm_of_q(space, cost, mu, f, t, schedule(t).first)) /
                          h;
        w.take(o.tol["fd"] * std::max(1.0, std::abs(d)) - std::abs(fd - d));
      }
    }
  }
  return make_row("entropy-derivative-formula",
                  "right derivative of log||e^{Q_tf}||_{k(t)} against forward differences", w);
}

inline VerifyRow row_poincare(const VerifyOptions& o) {
  const int cases = o.scale == VerifyScale::full ? 100 : 20;
  const CostFunction theta = CostFunction::power(2.0).scaled(2.0);
  const MetricSpace space = two_point_space();
  const ProbMeasure mu = ProbMeasure::uniform(2);
  const double C = estimate_transport_constant(space, theta, mu, 16, o.seed).constant_estimate;
  Rng rng(mix_seed(o.seed, 110));
  Worst w;
  for (int i = 0; i < cases; ++i)
    w.take(poincare_check(space, theta, mu, C, random_field(rng, 2)).slack + o.tol["exact"]);
  return make_row("poincare-from-transport", "Var <= (C/2) int |grad^- f|^2 with C from T_theta",
                  w);
}

inline VerifyRow row_hypercontractivity_audit(const VerifyOptions& o) {
  const int per_fixture = o.scale == VerifyScale::full ? 100 : 20;
  const CostFunction cost = CostFunction::power(2.0);
  Rng rng(mix_seed(o.seed, 111));
  Worst w;
  for (const auto& [name, space] : fixtures()) {
    const ProbMeasure mu = ProbMeasure::uniform(space.size());
    const double C = estimate_lsi_constant(space, cost, mu, 32, o.seed).constant_estimate * 1.05;
    const ScheduleParams params = ScheduleParams::from_cost(cost, C, C);
    for (int i = 0; i < per_fixture; ++i) {
      const auto prof = hypercontractivity_profile(space, cost, mu, params, random_field(rng, space.size()));
      w.take(o.tol["exact"] - prof.max_increase);
    }
  }
  return make_row("hypercontractivity-monotone",
                  "H(t) nonincreasing with C = 1.05 x LSI estimate on the fixtures", w, true);
}

inline VerifyRow row_dual_transport_audit(const VerifyOptions& o) {
  const CostFunction cost = CostFunction::power(2.0);
  Worst w;
  for (const auto& [name, space] : fixtures()) {
    const ProbMeasure mu = ProbMeasure::uniform(space.size());
    const InequalityReport rep = estimate_lsi_constant(space, cost, mu, 32, o.seed);
    const double A = otto_villani_constant(cost.exponents(), rep.constant_estimate) * 1.05;
    for (const ScalarField& f : rep.pool)
      w.take(o.tol["exact"] - bobkov_gotze_gap(space, cost, mu, A, f));
  }
  return make_row("transport-from-lsi-dual",
                  "dual transport gap at the constant derived from the LSI estimate", w, true);
}

inline VerifyRow row_chain_audit(const VerifyOptions& o) {
  Worst w;
  const ChainAudit a =
      constant_chain_audit(two_point_space(), 2.0, ProbMeasure::uniform(2), 16, o.seed);
  const double s = 1.0 + a.slack;
  auto rel = [&](double lhs, double rhs) { return (rhs * s - lhs) / std::max(1e-300, rhs * s); };
  w.take(rel(a.F.constant_estimate, a.E.constant_estimate), a.f_le_e);
  w.take(rel(a.E.constant_estimate, a.D.constant_estimate), a.e_le_d);
  w.take(rel(a.D.constant_estimate, a.C.constant_estimate), a.d_le_c);
  w.take(rel(a.C.constant_estimate, a.kappa * a.F.constant_estimate), a.c_le_kappa_f);
  return make_row("constant-chain-ordering", "F <= E <= D <= C <= kappa_p F on the two-point space",
                  w, true);
}

}  // namespace detail

/// Runs every invariant row. Deterministic for fixed options, independent
/// of the thread count.
inline VerifySummary verify_paper(const VerifyOptions& o) {
  using namespace detail;
  VerifySummary out;
  auto& rows = out.rows;
  rows.push_back(row_kappa2(o));
  rows.push_back(row_theta2(o));
  rows.push_back(row_beta_examples(o));
  rows.push_back(row_phi_asymptotics(o));
  rows.push_back(row_ell_ode(o));
  rows.push_back(row_time_derivative(o));
  const GridHj hj = grid_hamilton_jacobi(o);
  rows.push_back(make_row("hj-inequality-grid",
                          "d/dt+ P_tf >= alpha*(|grad+ P_tf|) on refining grids", hj.inequality));
  rows.push_back(make_row("hj-equality-refinement",
                          "equality residual shrinks under mesh halving", hj.refinement));
  rows.push_back(row_half_semigroup(o));
  rows.push_back(row_localization(o));
  const ConvexityRows cv = convexity_calculus(o);
  rows.push_back(make_row("c-convexify-idempotent", "P_cQ_c applied twice", cv.idempotence));
  rows.push_back(make_row("maximizers-in-subdifferential",
                          "maximizers of P_cg(x) lie in the c-subdifferential", cv.inclusion));
  rows.push_back(make_row("subdifferential-nonempty",
                          "c-subdifferentials of convexified fields are nonempty", cv.nonempty));
  rows.push_back(make_row("gradient-chain-exact",
                          "alpha'(max_m d) <= plus c-gradient, minus c-gradient <= alpha'(min_m d)",
                          cv.chain));
  const TransportRows tr = transport_checks(o);
  rows.push_back(make_row("ot-quantile-oracle", "simplex cost against the 1-D quantile coupling",
                          tr.oracle));
  rows.push_back(make_row("ot-duality-gap", "primal minus dual objective", tr.duality));
  rows.push_back(row_kc_convex_comparison(o));
  rows.push_back(row_entropy_derivative(o));
  rows.push_back(row_poincare(o));
  rows.push_back(row_hypercontractivity_audit(o));
  rows.push_back(row_dual_transport_audit(o));
  rows.push_back(row_chain_audit(o));
  rows.push_back(row_chain_equality_audit(o));
  return out;
}

inline std::string format_verify_table(const VerifySummary& s, const VerifyOptions& o) {
  std::string out = "# verify-paper scale=";
  out += o.scale == VerifyScale::full ? "full" : "smoke";
  out += " seed=" + std::to_string(o.seed);
  if (o.perturbed_beta) out += " inject-fault=perturbed-beta";
  out += "\n";
  for (const auto& [k, v] : o.tol.overrides()) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "# tol %s=%.17g\n", k.c_str(), v);
    out += buf;
  }
  char line[512];
  std::snprintf(line, sizeof line, "%-32s %-6s %-6s %8s %16s  %s\n", "row", "kind", "status", "cases",
                "slack", "checks");
  out += line;
  for (const auto& r : s.rows) {
    std::snprintf(line, sizeof line, "%-32s %-6s %-6s %8zu %16.6e  %s\n", r.label.c_str(),
                  r.audit ? "audit" : "gate", r.passed ? "PASS" : "FAIL", r.cases, r.slack,
                  r.what.c_str());
    out += line;
  }
  std::size_t gates = 0, passed = 0;
  for (const auto& r : s.rows)
    if (!r.audit) {
      ++gates;
      if (r.passed) ++passed;
    }
  std::snprintf(line, sizeof line, "# %zu/%zu gating rows passed\n", passed, gates);
  out += line;
  return out;
}

}  // namespace hopflax
