#include "lyapfix/commands.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "lyapfix/gibbs.hpp"

namespace lyapfix {

namespace {

using ojson = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string fixed10(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10f", x);
  return buf;
}

ojson kernel_json(const Kernel& k) {
  const UniquenessCheck u = uniqueness_check(k);
  return ojson{{"omega", k.omega()},
               {"Omega", k.Omega()},
               {"ratio", u.ratio},
               {"c_max", u.c_max},
               {"c_max_text", fixed10(u.c_max)},
               {"satisfied", u.satisfied},
               {"grid", k.bounds().grid},
               {"refine", k.bounds().refine}};
}

ojson values_json(const GridFunction& f) {
  ojson arr = ojson::array();
  for (double v : f.values()) arr.push_back(v);
  return arr;
}

ojson optional_json(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

CsvRow kernel_row(const Kernel& k) {
  const UniquenessCheck u = uniqueness_check(k);
  CsvRow row;
  row.omega = k.omega();
  row.Omega = k.Omega();
  row.ratio = u.ratio;
  row.satisfied = u.satisfied;
  return row;
}

struct Solved {
  ojson json;
  int distinct_count = 0;
  std::optional<double> min_residual;
  bool any_converged = false;
};

Solved solve_block(const LyapunovOperator& op, const SolverConfig& solver) {
  const MultiStartResult ms = multi_start(op, solver);
  Solved out;
  out.distinct_count = ms.distinct_count;
  out.min_residual = ms.min_residual();
  out.any_converged = ms.converged_count() > 0;

  ojson solutions = ojson::array();
  for (std::size_t c = 0; c < ms.representatives.size(); ++c) {
    const FixedPointReport& rep = ms.reports[ms.representatives[c]];
    int members = 0;
    for (int id : ms.cluster) members += id == static_cast<int>(c) ? 1 : 0;
    const GridFunction g = h_to_l(op, rep.solution);
    solutions.push_back(ojson{{"cluster", c},
                              {"start", ms.representatives[c]},
                              {"members", members},
                              {"residual", rep.residual},
                              {"iterations", rep.iterations},
                              {"denominator", op.denominator(rep.solution)},
                              {"l_residual", op.residual(g, Equation::L)},
                              {"h_values", values_json(rep.solution)},
                              {"l_values", values_json(g)}});
  }
  ojson runs = ojson::array();
  for (std::size_t i = 0; i < ms.reports.size(); ++i) {
    const FixedPointReport& r = ms.reports[i];
    runs.push_back(ojson{{"start", i},
                         {"converged", r.converged},
                         {"iterations", r.iterations},
                         {"residual", r.residual},
                         {"cluster", ms.cluster[i]}});
  }
  ojson nodes = ojson::array();
  for (double x : op.rule().nodes) nodes.push_back(x);

  out.json = ojson{{"starts", ms.reports.size()},
                   {"converged", ms.converged_count()},
                   {"distinct_count", ms.distinct_count},
                   {"min_residual", optional_json(ms.min_residual())},
                   {"max_residual", optional_json(ms.max_residual())},
                   {"nodes", std::move(nodes)},
                   {"solutions", std::move(solutions)},
                   {"runs", std::move(runs)}};
  return out;
}

std::shared_ptr<const QuadratureRule> make_rule(int n) {
  return std::make_shared<const QuadratureRule>(gauss_legendre(n));
}

void check_tree_feasible(const TreeSpec& spec) {
  const RootedTree tree(spec.k, spec.n);
  const RootedTree inner(spec.k, spec.n - 1);
  const double q = spec.quadrature_nodes;
  const double full = std::pow(q, static_cast<double>(tree.vertex_count()));
  const double boundary = static_cast<double>(tree.vertex_count() - inner.vertex_count());
  const double compat = std::pow(5.0, static_cast<double>(inner.vertex_count())) * std::pow(q, boundary);
  if (full > kMaxTensorTerms || compat > kMaxTensorTerms)
    throw FeasibilityError("tree k=" + std::to_string(spec.k) + ", n=" + std::to_string(spec.n) + " with " +
                           std::to_string(spec.quadrature_nodes) + " spin nodes needs more than 1e8 tensor terms");
}

void add_timings(ojson& report, const RunOptions& opts, const ojson& timings) {
  if (opts.timings) report["timings"] = timings;
}

}  // namespace

RunReport run_check(const ExperimentConfig& cfg, const RunOptions& opts, const std::string& command) {
  const auto t0 = Clock::now();
  const Kernel k = build_kernel(cfg.model_params(), cfg.bounds);
  RunReport out;
  out.json["command"] = command;
  out.json["config"] = cfg.to_json();
  out.json["kernel"] = kernel_json(k);
  add_timings(out.json, opts, ojson{{"kernel_ms", ms_since(t0)}});
  out.rows.push_back(kernel_row(k));
  return out;
}

RunReport run_solve(const ExperimentConfig& cfg, const RunOptions& opts) {
  const auto t0 = Clock::now();
  const Kernel k = build_kernel(cfg.model_params(), cfg.bounds);
  const double kernel_ms = ms_since(t0);
  const LyapunovOperator op(k, make_rule(cfg.quadrature_nodes));
  const auto t1 = Clock::now();
  Solved solved = solve_block(op, cfg.solver);

  RunReport out;
  out.json["command"] = "solve";
  out.json["config"] = cfg.to_json();
  out.json["kernel"] = kernel_json(k);
  out.json["fixed_points"] = std::move(solved.json);
  add_timings(out.json, opts, ojson{{"kernel_ms", kernel_ms}, {"solve_ms", ms_since(t1)}, {"total_ms", ms_since(t0)}});

  CsvRow row = kernel_row(k);
  row.distinct_count = solved.distinct_count;
  row.min_residual = solved.min_residual;
  out.rows.push_back(row);
  out.exit_code = solved.any_converged ? kExitOk : kExitNoConvergence;
  return out;
}

RunReport run_verify(const ExperimentConfig& cfg, const RunOptions& opts) {
  check_tree_feasible(cfg.tree);
  const auto t0 = Clock::now();
  const ModelParams params = cfg.model_params();
  const Kernel k = build_kernel(params, cfg.bounds);
  const LyapunovOperator op(k, make_rule(cfg.quadrature_nodes));

  RunReport out;
  out.json["command"] = "verify-consistency";
  out.json["config"] = cfg.to_json();
  out.json["kernel"] = kernel_json(k);

  std::optional<BoundaryField> field;
  ojson field_json;
  CsvRow row = kernel_row(k);
  if (opts.field_override) {
    Expression e;
    try {
      e = Expression::parse(*opts.field_override, {Variable::t});
    } catch (const ExprError& ex) {
      throw ConfigError("--field-override", ex.what());
    }
    field = BoundaryField::from_expression(e, op.rule_ptr());
    field_json = ojson{{"source", "override"}, {"expression", *opts.field_override}};
  } else {
    const FixedPointReport rep = solve_H(op, cfg.solver, GridFunction::constant(op.rule_ptr(), 1.0));
    field_json = ojson{{"source", "solution"},
                       {"converged", rep.converged},
                       {"residual", rep.residual},
                       {"iterations", rep.iterations},
                       {"values", values_json(rep.solution)}};
    if (!rep.converged) {
      out.json["field"] = field_json;
      out.exit_code = kExitNoConvergence;
      out.rows.push_back(row);
      return out;
    }
    row.distinct_count = 1;
    row.min_residual = rep.residual;
    field = BoundaryField::from_solution(op, rep.solution);
  }
  out.json["field"] = field_json;
  const double solve_ms = ms_since(t0);

  const auto t1 = Clock::now();
  const RootedTree tree(cfg.tree.k, cfg.tree.n);
  const QuadratureRule spin_rule = gauss_legendre(cfg.tree.quadrature_nodes);
  const double compat = compatibility_residual(tree, params, *field, spin_rule);
  const double consist = consistency_residual(op, *field);
  const PartitionFunction z = partition_function(tree, params, *field, spin_rule);

  out.json["gibbs"] = ojson{{"tree", {{"k", cfg.tree.k}, {"n", cfg.tree.n}, {"quadrature_nodes", cfg.tree.quadrature_nodes}}},
                            {"log_partition_function", z.log_z},
                            {"compatibility_residual", compat},
                            {"compatibility_tol", kCompatibilityTol},
                            {"compatibility_pass", compat < kCompatibilityTol},
                            {"consistency_residual", consist},
                            {"consistency_tol", kConsistencyTol},
                            {"consistency_pass", consist < kConsistencyTol},
                            {"pass", compat < kCompatibilityTol && consist < kConsistencyTol}};
  add_timings(out.json, opts, ojson{{"solve_ms", solve_ms}, {"gibbs_ms", ms_since(t1)}, {"total_ms", ms_since(t0)}});
  out.rows.push_back(row);
  return out;
}

RunReport run_sweep(const ExperimentConfig& cfg, const RunOptions& opts) {
  if (!cfg.sweep) throw ConfigError("sweep", "required section missing for the sweep command");
  const SweepSpec& sw = *cfg.sweep;
  if (sw.steps < 2) throw ConfigError("sweep.steps", "must be at least 2");

  const auto t0 = Clock::now();
  const auto rule = make_rule(cfg.quadrature_nodes);
  RunReport out;
  out.json["command"] = "sweep";
  out.json["config"] = cfg.to_json();
  ojson rows = ojson::array();
  for (int step = 0; step < sw.steps; ++step) {
    const double value = sw.value(step);
    ojson row_json{{"sweep_value", value}};
    CsvRow row;
    row.sweep_value = value;
    row.omega = row.Omega = row.ratio = std::nan("");
    try {
      const ExperimentConfig point = cfg.with_parameter(sw.parameter, value);
      const Kernel k = build_kernel(point.model_params(), point.bounds);
      const CsvRow kr = kernel_row(k);
      row.omega = kr.omega;
      row.Omega = kr.Omega;
      row.ratio = kr.ratio;
      row.satisfied = kr.satisfied;
      row_json["kernel"] = kernel_json(k);
      const LyapunovOperator op(k, rule);
      const MultiStartResult ms = multi_start(op, point.solver);
      row.distinct_count = ms.distinct_count;
      row.min_residual = ms.min_residual();
      row_json["converged"] = ms.converged_count();
      row_json["distinct_count"] = ms.distinct_count;
      row_json["min_residual"] = optional_json(ms.min_residual());
      row_json["max_residual"] = optional_json(ms.max_residual());
    } catch (const std::exception& e) {
      row_json["error"] = e.what();
    }
    rows.push_back(std::move(row_json));
    out.rows.push_back(row);
  }
  out.json["rows"] = std::move(rows);
  add_timings(out.json, opts, ojson{{"total_ms", ms_since(t0)}});
  return out;
}

namespace {

void write_number(std::ostream& out, double x) {
  if (std::isnan(x)) {
    out << "nan";
    return;
  }
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  out.write(buf, ptr - buf);
}

}  // namespace

void write_csv(std::ostream& out, const std::vector<CsvRow>& rows) {
  out << "sweep_value,omega,Omega,ratio,satisfied,distinct_count,min_residual\n";
  for (const CsvRow& r : rows) {
    if (r.sweep_value) write_number(out, *r.sweep_value);
    out << ',';
    write_number(out, r.omega);
    out << ',';
    write_number(out, r.Omega);
    out << ',';
    write_number(out, r.ratio);
    out << ',' << (r.satisfied ? "true" : "false") << ',' << r.distinct_count << ',';
    write_number(out, r.min_residual.value_or(std::nan("")));
    out << '\n';
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fixed points of Lyapunov integral operators and Gibbs measure checks", "lyapfix"};
  app.require_subcommand(1);

  struct Flags {
    std::string config;
    std::string output;
    std::string format = "json";
    std::optional<std::uint64_t> seed;
    bool no_timings = false;
    std::optional<std::string> field_override;
  } flags;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "experiment config (JSON)")->required();
    sub->add_option("--output", flags.output, "write the report here instead of stdout");
    sub->add_option("--format", flags.format, "report format")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--seed", flags.seed, "override solver.seed");
    sub->add_flag("--no-timings", flags.no_timings, "omit wall-clock timings from JSON");
  };
  CLI::App* solve = app.add_subcommand("solve", "multi-start fixed-point search");
  CLI::App* bounds = app.add_subcommand("bounds", "kernel extremes omega and Omega");
  CLI::App* check = app.add_subcommand("check-uniqueness", "decide Omega/omega < c_max");
  CLI::App* verify = app.add_subcommand("verify-consistency", "finite-volume Gibbs compatibility check");
  CLI::App* sweep = app.add_subcommand("sweep", "sweep one coupling and record uniqueness evidence");
  for (CLI::App* sub : {solve, bounds, check, verify, sweep}) add_common(sub);
  verify->add_option("--field-override", flags.field_override, "boundary field f(t) to test instead of the solution");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  RunReport report;
  try {
    ExperimentConfig cfg = ExperimentConfig::load(flags.config);
    if (flags.seed) cfg.solver.seed = *flags.seed;
    RunOptions opts;
    opts.timings = !flags.no_timings;
    opts.field_override = flags.field_override;

    if (solve->parsed())
      report = run_solve(cfg, opts);
    else if (bounds->parsed())
      report = run_check(cfg, opts, "bounds");
    else if (check->parsed())
      report = run_check(cfg, opts, "check-uniqueness");
    else if (verify->parsed())
      report = run_verify(cfg, opts);
    else
      report = run_sweep(cfg, opts);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ExprError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const FeasibilityError& e) {
    err << "infeasible: " << e.what() << '\n';
    return kExitFeasibility;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNoConvergence;
  }

  if (report.json.contains("kernel")) {
    const auto& k = report.json["kernel"];
    err << "Omega/omega = " << k["ratio"].get<double>() << ", c_max = " << k["c_max_text"].get<std::string>()
        << ", condition " << (k["satisfied"].get<bool>() ? "satisfied" : "not satisfied") << '\n';
  }

  std::ofstream file;
  std::ostream* sink = &out;
  if (!flags.output.empty()) {
    file.open(flags.output, std::ios::binary);
    if (!file) {
      err << "config error: cannot write '" << flags.output << "'\n";
      return kExitConfig;
    }
    sink = &file;
  }
  if (flags.format == "csv")
    write_csv(*sink, report.rows);
  else
    *sink << report.json.dump(2) << '\n';
  return report.exit_code;
}

}  // namespace lyapfix
