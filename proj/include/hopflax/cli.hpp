#pragma once

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hopflax/constants.hpp"
#include "hopflax/convexity.hpp"
#include "hopflax/error.hpp"
#include "hopflax/hopf_lax.hpp"
#include "hopflax/inequalities.hpp"
#include "hopflax/io.hpp"
#include "hopflax/transport.hpp"
#include "hopflax/verify.hpp"

namespace hopflax::cli {

enum ExitCode : int { kPass = 0, kInvariantFailed = 1, kInputError = 2 };

/// Parsed command line for one subcommand.
struct RunConfig {
  std::string command;
  std::string space, cost, mu, nu, field, out;
  std::string format;
  std::string t_grid;
  std::string scale = "smoke";
  std::string inject_fault;
  std::string inequality = "lsi";
  std::optional<double> p, C, t_o, K;
  std::uint64_t seed = 0;
  std::size_t budget = 32;
  std::size_t fields = 100;
  std::vector<std::string> tol;
};

namespace detail {

using io::Json;

inline void require_path(const std::string& path, const char* flag) {
  if (path.empty()) fail(ErrorKind::ValidationError, std::string("missing required flag ") + flag);
}

inline io::LoadedSpace load_space(const RunConfig& c) {
  require_path(c.space, "--space");
  return io::space_from_json(io::read_json_file(c.space));
}

/// --cost PATH, else --p for the cost d^p/p, else the quadratic cost.
inline CostFunction load_cost(const RunConfig& c) {
  if (!c.cost.empty()) return io::cost_from_json(io::read_json_file(c.cost));
  return CostFunction::power(c.p.value_or(2.0));
}

inline ProbMeasure load_measure(const std::string& path, const MetricSpace& space,
                                const char* flag) {
  if (path.empty()) return ProbMeasure::uniform(space.size());
  const ProbMeasure m = io::measure_from_json(io::read_json_file(path));
  require_measure(space, m, flag);
  return m;
}

inline ScalarField load_field(const RunConfig& c, const MetricSpace& space) {
  require_path(c.field, "--field");
  const ScalarField f = io::field_from_json(io::read_json_file(c.field));
  require_field(space, f);
  return f;
}

/// a:b:k → k evenly spaced times from a to b.
inline std::vector<double> parse_t_grid(const std::string& spec) {
  double a = 0.0, b = 0.0;
  long k = 0;
  char tail = 0;
  if (std::sscanf(spec.c_str(), "%lf:%lf:%ld%c", &a, &b, &k, &tail) != 3 || k < 1)
    fail(ErrorKind::ValidationError, "--t-grid expects a:b:k with k >= 1, got \"" + spec + "\"");
  if (!(a > 0.0) || !(b >= a) || !std::isfinite(b))
    fail(ErrorKind::ValidationError, "--t-grid needs 0 < a <= b");
  std::vector<double> grid(static_cast<std::size_t>(k));
  for (long i = 0; i < k; ++i)
    grid[static_cast<std::size_t>(i)] = k == 1 ? a : a + (b - a) * static_cast<double>(i) / (k - 1);
  return grid;
}

inline Tolerances tolerances(const RunConfig& c) {
  Tolerances t;
  for (const auto& s : c.tol) t.set_from_string(s);
  return t;
}

inline std::string comment_header(const Tolerances& t) {
  std::string out;
  for (const auto& [k, v] : t.overrides()) out += "# tol " + k + "=" + io::fmt(v) + "\n";
  return out;
}

inline void add_tolerances(Json& doc, const Tolerances& t) {
  if (t.overrides().empty()) return;
  Json o = Json::object();
  for (const auto& [k, v] : t.overrides()) o[k] = v;
  doc["tolerances"] = o;
}

inline void require_format(const std::string& f, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (f == a) return;
  std::string list;
  for (const char* a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
  fail(ErrorKind::ValidationError, "format \"" + f + "\" is not available here; use " + list);
}

struct Output {
  std::string text;
  int code = kPass;
  std::string failure;
};

inline Output text_only(std::string text) {
  Output o;
  o.text = std::move(text);
  return o;
}

// --- subcommands --------------------------------------------------------

inline Output cmd_evolve(const RunConfig& c) {
  const std::string format = c.format.empty() ? "csv" : c.format;
  require_format(format, {"csv", "json", "table"});
  const Tolerances tol = tolerances(c);
  const auto loaded = load_space(c);
  const CostFunction cost = load_cost(c);
  const ScalarField f = load_field(c, loaded.space);
  const auto times = parse_t_grid(c.t_grid.empty() ? "1:1:1" : c.t_grid);
  const auto rows = evolve(loaded.space, cost, f, times, tol["tie"]);
  Output out;
  if (format == "json") {
    Json doc;
    doc["cost"] = cost.describe();
    add_tolerances(doc, tol);
    Json arr = Json::array();
    for (const auto& r : rows)
      arr.push_back({{"t", r.t}, {"x", loaded.labels[r.x]}, {"Ptf", r.ptf}, {"Qtf", r.qtf},
                     {"dplus", r.dplus}, {"dminus", r.dminus}, {"maxdist", r.maxdist},
                     {"mindist", r.mindist}});
    doc["rows"] = arr;
    out.text = doc.dump(2) + "\n";
    return out;
  }
  const char* sep = format == "csv" ? "," : "\t";
  std::string s = comment_header(tol);
  s += std::string("t") + sep + "x" + sep + "Ptf" + sep + "Qtf" + sep + "dplus" + sep + "dminus" +
       sep + "maxdist" + sep + "mindist\n";
  for (const auto& r : rows) {
    s += io::fmt(r.t) + sep + loaded.labels[r.x] + sep + io::fmt(r.ptf) + sep + io::fmt(r.qtf) +
         sep + io::fmt(r.dplus) + sep + io::fmt(r.dminus) + sep + io::fmt(r.maxdist) + sep +
         io::fmt(r.mindist) + "\n";
  }
  out.text = s;
  return out;
}

inline Output cmd_cconvex(const RunConfig& c) {
  require_format(c.format.empty() ? "json" : c.format, {"json"});
  const Tolerances tol = tolerances(c);
  const auto loaded = load_space(c);
  const CostFunction cost = load_cost(c);
  const ScalarField g = load_field(c, loaded.space);
  const double K = c.K.value_or(1.0);
  if (!(K > 0.0)) fail(ErrorKind::ValidationError, "--K must be positive");
  const SquareMatrix cm = cost_matrix(loaded.space, cost.scaled(K));
  const ConvexityCheck check = is_c_convex(cm, g);
  const CGradients grads = c_gradients(loaded.space, cost, K, g, false, tol["tie"]);
  Json doc;
  doc["cost"] = cost.scaled(K).describe();
  add_tolerances(doc, tol);
  doc["c_convex"] = check.convex;
  doc["deviation"] = check.deviation;
  doc["convexified"] = grads.sub.field.vector();
  Json sets = Json::object();
  for (std::size_t x = 0; x < loaded.space.size(); ++x) {
    Json pts = Json::array();
    for (std::size_t y : grads.sub.at(x)) pts.push_back(loaded.labels[y]);
    sets[loaded.labels[x]] = pts;
  }
  doc["subdifferential"] = sets;
  doc["c_gradient_plus"] = grads.plus;
  doc["c_gradient_minus"] = grads.minus;
  return text_only(doc.dump(2) + "\n");
}

inline Output cmd_ot(const RunConfig& c) {
  require_format(c.format.empty() ? "json" : c.format, {"json"});
  const Tolerances tol = tolerances(c);
  const auto loaded = load_space(c);
  const CostFunction cost = load_cost(c);
  require_path(c.mu, "--mu");
  require_path(c.nu, "--nu");
  const ProbMeasure a = load_measure(c.mu, loaded.space, "--mu");
  const ProbMeasure b = load_measure(c.nu, loaded.space, "--nu");
  const TransportPlan plan = ot_cost(loaded.space, cost, a, b);
  Json doc;
  doc["cost"] = cost.describe();
  add_tolerances(doc, tol);
  doc["transport_cost"] = plan.cost;
  doc["dual_value"] = plan.dual_value;
  doc["duality_gap"] = plan.duality_gap;
  Json entries = Json::array();
  const std::size_t n = loaded.space.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (plan.pi(i, j) > 0.0)
        entries.push_back({{"from", loaded.labels[i]}, {"to", loaded.labels[j]}, {"mass", plan.pi(i, j)}});
  doc["plan"] = entries;
  doc["u"] = plan.u;
  doc["v"] = plan.v;
  Output out = text_only(doc.dump(2) + "\n");
  if (std::abs(plan.duality_gap) > tol["ot"]) {
    out.code = kInvariantFailed;
    out.failure = "duality gap " + io::fmt(plan.duality_gap) + " exceeds tolerance ot";
  }
  return out;
}

inline Output cmd_kappa(const RunConfig& c) {
  const std::string format = c.format.empty() ? "table" : c.format;
  require_format(format, {"table", "json"});
  const double p = c.p.value_or(2.0);
  const double k = kappa_p(p);
  if (format == "json") {
    Json doc;
    doc["p"] = p;
    doc["kappa"] = k;
    doc["a_p"] = a_p(p);
    return text_only(doc.dump(2) + "\n");
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.8f\n", k);
  return text_only(buf);
}

inline Output cmd_estimate(const RunConfig& c) {
  require_format(c.format.empty() ? "json" : c.format, {"json"});
  const auto loaded = load_space(c);
  const ProbMeasure mu = load_measure(c.mu, loaded.space, "--mu");
  const double p = c.p.value_or(2.0);
  InequalityReport rep;
  if (c.inequality == "lsi") {
    rep = estimate_lsi_constant(loaded.space, load_cost(c), mu, c.budget, c.seed);
  } else if (c.inequality == "transport") {
    rep = estimate_transport_constant(loaded.space, load_cost(c), mu, c.budget, c.seed);
  } else if (c.inequality == "tau-lsi") {
    rep = estimate_tau_lsi_constant(loaded.space, p, mu, c.budget, c.seed);
  } else if (c.inequality == "restricted-minus") {
    rep = estimate_restricted_lsi_constant(loaded.space, p, mu, RestrictedVariant::minus_cgrad,
                                           c.budget, c.seed);
  } else if (c.inequality == "restricted-plus") {
    rep = estimate_restricted_lsi_constant(loaded.space, p, mu, RestrictedVariant::plus_slope,
                                           c.budget, c.seed);
  } else {
    fail(ErrorKind::ValidationError,
         "unknown --inequality \"" + c.inequality +
             "\"; use lsi, transport, tau-lsi, restricted-minus or restricted-plus");
  }
  return text_only(io::report_to_json(rep).dump(2) + "\n");
}

inline Output cmd_constants(const RunConfig& c) {
  require_format(c.format.empty() ? "json" : c.format, {"json"});
  const auto loaded = load_space(c);
  const ProbMeasure mu = load_measure(c.mu, loaded.space, "--mu");
  const ChainAudit a = constant_chain_audit(loaded.space, c.p.value_or(2.0), mu, c.budget, c.seed);
  Json doc;
  doc["p"] = a.p;
  doc["kappa"] = a.kappa;
  doc["slack"] = a.slack;
  doc["F"] = io::report_to_json(a.F);
  doc["E"] = io::report_to_json(a.E);
  doc["D"] = io::report_to_json(a.D);
  doc["C"] = io::report_to_json(a.C);
  doc["ordering"] = {{"F<=E", a.f_le_e},
                     {"E<=D", a.e_le_d},
                     {"D<=C", a.d_le_c},
                     {"C<=kappa*F", a.c_le_kappa_f}};
  return text_only(doc.dump(2) + "\n");
}

inline Output cmd_hyper(const RunConfig& c) {
  const std::string format = c.format.empty() ? "csv" : c.format;
  require_format(format, {"csv", "json"});
  const Tolerances tol = tolerances(c);
  const auto loaded = load_space(c);
  const CostFunction cost = load_cost(c);
  const ProbMeasure mu = load_measure(c.mu, loaded.space, "--mu");
  double C = 0.0;
  if (c.C) {
    C = *c.C;
  } else {
    C = estimate_lsi_constant(loaded.space, cost, mu, c.budget, c.seed).constant_estimate * 1.05;
    if (!(C > 0.0))
      fail(ErrorKind::ValidationError, "the LSI estimate is zero here; pass --C explicitly");
  }
  const double t_o = c.t_o.value_or(C * (cost.exponents().p_alpha - 1.0));
  const ScheduleParams params = ScheduleParams::from_cost(cost, C, t_o);
  std::vector<double> grid = c.t_grid.empty() ? default_t_grid(t_o) : parse_t_grid(c.t_grid);

  std::vector<ScalarField> fields;
  if (!c.field.empty()) {
    fields.push_back(load_field(c, loaded.space));
  } else {
    Rng rng(mix_seed(c.seed, 7));
    for (std::size_t i = 0; i < c.fields; ++i) fields.push_back(random_field(rng, loaded.space.size()));
  }
  Output out;
  Json doc;
  doc["C"] = C;
  doc["t_o"] = t_o;
  add_tolerances(doc, tol);
  Json arr = Json::array();
  std::string csv = comment_header(tol) + "field,t,k,H\n";
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const HyperProfile prof = hypercontractivity_profile(loaded.space, cost, mu, params, fields[i], grid);
    Json rows = Json::array();
    for (const auto& r : prof.rows) {
      rows.push_back({{"t", r.t}, {"k", r.k}, {"H", r.H}});
      csv += std::to_string(i) + "," + io::fmt(r.t) + "," + io::fmt(r.k) + "," + io::fmt(r.H) + "\n";
    }
    arr.push_back({{"k0", prof.k0}, {"H0", prof.H0}, {"max_increase", prof.max_increase},
                   {"rows", rows}});
    if (!prof.nonincreasing(tol["exact"]) && out.code == kPass) {
      out.code = kInvariantFailed;
      out.failure = "H(t) increases by " + io::fmt(prof.max_increase) + " for field " +
                    std::to_string(i);
    }
  }
  doc["fields"] = arr;
  out.text = format == "json" ? doc.dump(2) + "\n" : csv;
  return out;
}

inline Output cmd_verify(const RunConfig& c) {
  const std::string format = c.format.empty() ? "table" : c.format;
  require_format(format, {"table", "json"});
  VerifyOptions o;
  o.tol = tolerances(c);
  o.seed = c.seed;
  if (c.scale == "smoke") {
    o.scale = VerifyScale::smoke;
  } else if (c.scale == "full") {
    o.scale = VerifyScale::full;
  } else {
    fail(ErrorKind::ValidationError, "--scale must be smoke or full");
  }
  if (!c.inject_fault.empty()) {
    if (c.inject_fault != "perturbed-beta")
      fail(ErrorKind::ValidationError, "the only injectable fault is perturbed-beta");
    o.perturbed_beta = true;
  }
  const VerifySummary s = verify_paper(o);
  Output out;
  if (format == "json") {
    Json doc;
    doc["scale"] = c.scale;
    doc["seed"] = c.seed;
    add_tolerances(doc, o.tol);
    Json rows = Json::array();
    for (const auto& r : s.rows)
      rows.push_back({{"row", r.label}, {"kind", r.audit ? "audit" : "gate"},
                      {"passed", r.passed}, {"cases", r.cases}, {"slack", r.slack},
                      {"checks", r.what}});
    doc["rows"] = rows;
    out.text = doc.dump(2) + "\n";
  } else {
    out.text = format_verify_table(s, o);
  }
  if (const VerifyRow* f = s.first_failure()) {
    out.code = kInvariantFailed;
    out.failure = "row " + f->label + " failed with slack " + io::fmt(f->slack);
  }
  return out;
}

inline void write_output(const RunConfig& c, const std::string& text, std::ostream& out) {
  if (c.out.empty()) {
    out << text;
    return;
  }
  std::ofstream file(c.out, std::ios::binary);
  if (!file) fail(ErrorKind::ValidationError, "cannot write " + c.out);
  file << text;
}

}  // namespace detail

/// Parses args (without the program name), runs the subcommand and returns
/// the exit code.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hopf-Lax semigroups, c-convexity and functional inequalities on finite metric spaces",
               "hopflax"};
  app.require_subcommand(1);
  RunConfig cfg;
  app.add_option("--seed", cfg.seed, "random seed (default 0)");
  app.add_option("--out", cfg.out, "write the report here instead of standard output");
  app.add_option("--format", cfg.format, "json, csv or table");
  app.add_option("--tol", cfg.tol, "override a tolerance, NAME=VALUE");

  auto space_opts = [&](CLI::App* s) {
    s->add_option("--space", cfg.space, "space JSON");
    s->add_option("--cost", cfg.cost, "cost JSON");
    s->add_option("--p", cfg.p, "exponent of the cost d^p/p when --cost is absent");
  };
  auto common = [&](CLI::App* s) {
    s->add_option("--seed", cfg.seed, "random seed (default 0)");
    s->add_option("--out", cfg.out, "output path");
    s->add_option("--format", cfg.format, "json, csv or table");
    s->add_option("--tol", cfg.tol, "override a tolerance, NAME=VALUE");
  };

  auto* evolve = app.add_subcommand("evolve", "tabulate P_tf, Q_tf and their time derivatives");
  space_opts(evolve);
  common(evolve);
  evolve->add_option("--field", cfg.field, "field JSON");
  evolve->add_option("--t-grid", cfg.t_grid, "a:b:k");

  auto* cconvex = app.add_subcommand("cconvex", "c-convexity, c-subdifferentials and c-gradients");
  space_opts(cconvex);
  common(cconvex);
  cconvex->add_option("--field", cfg.field, "field JSON");
  cconvex->add_option("--K", cfg.K, "cost scale");

  auto* ot = app.add_subcommand("ot", "optimal transport cost between two measures");
  space_opts(ot);
  common(ot);
  ot->add_option("--mu", cfg.mu, "first measure JSON");
  ot->add_option("--nu", cfg.nu, "second measure JSON");

  auto* kappa = app.add_subcommand("kappa", "the constant kappa_p");
  common(kappa);
  kappa->add_option("--p", cfg.p, "exponent p >= 2");

  auto* estimate = app.add_subcommand("estimate", "randomized lower bound for one inequality");
  space_opts(estimate);
  common(estimate);
  estimate->add_option("--mu", cfg.mu, "reference measure JSON (default uniform)");
  estimate->add_option("--inequality", cfg.inequality,
                       "lsi, transport, tau-lsi, restricted-minus or restricted-plus");
  estimate->add_option("--budget", cfg.budget, "number of restarts");

  auto* constants = app.add_subcommand("constants", "estimate and compare the constant chain");
  space_opts(constants);
  common(constants);
  constants->add_option("--mu", cfg.mu, "reference measure JSON (default uniform)");
  constants->add_option("--budget", cfg.budget, "restarts per estimator");

  auto* hyper = app.add_subcommand("hyper", "monotonicity of log||e^{Q_tf}||_{k(t)}");
  space_opts(hyper);
  common(hyper);
  hyper->add_option("--mu", cfg.mu, "reference measure JSON (default uniform)");
  hyper->add_option("--field", cfg.field, "field JSON (default: --fields random fields)");
  hyper->add_option("--fields", cfg.fields, "number of random fields");
  hyper->add_option("--C", cfg.C, "LSI constant (default 1.05 x estimate)");
  hyper->add_option("--t-o", cfg.t_o, "switch time (default C(p_alpha - 1))");
  hyper->add_option("--t-grid", cfg.t_grid, "a:b:k");
  hyper->add_option("--budget", cfg.budget, "restarts for the LSI estimate");

  auto* verify = app.add_subcommand("verify-paper", "run the full invariant suite");
  common(verify);
  verify->add_option("--scale", cfg.scale, "smoke or full");
  verify->add_option("--inject-fault", cfg.inject_fault, "perturbed-beta");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kPass;
  } catch (const CLI::ParseError& e) {
    err << "ParseError: " << e.what() << "\n";
    return kInputError;
  }

  CLI::App* sub = app.get_subcommands().front();
  cfg.command = sub->get_name();
  try {
    detail::Output result;
    if (cfg.command == "evolve") result = detail::cmd_evolve(cfg);
    else if (cfg.command == "cconvex") result = detail::cmd_cconvex(cfg);
    else if (cfg.command == "ot") result = detail::cmd_ot(cfg);
    else if (cfg.command == "kappa") result = detail::cmd_kappa(cfg);
    else if (cfg.command == "estimate") result = detail::cmd_estimate(cfg);
    else if (cfg.command == "constants") result = detail::cmd_constants(cfg);
    else if (cfg.command == "hyper") result = detail::cmd_hyper(cfg);
    else result = detail::cmd_verify(cfg);
    detail::write_output(cfg, result.text, out);
    if (result.code != kPass) err << "invariant failed: " << result.failure << "\n";
    return result.code;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kInputError;
  }
}

}  // namespace hopflax::cli
