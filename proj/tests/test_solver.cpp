#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "lyapfix/solver.hpp"

using namespace lyapfix;

namespace {

std::shared_ptr<const QuadratureRule> rule_of(int n) {
  return std::make_shared<const QuadratureRule>(gauss_legendre(n));
}

Kernel constant_kernel(double kappa) {
  char src[48];
  std::snprintf(src, sizeof src, "log(%.17g)", kappa);
  return build_kernel(ModelParams::with_expressions(1, 0, 0, 0, 1, src, "0", "0"));
}

Kernel product_kernel(double coupling) {
  return build_kernel(ModelParams::with_expressions(0, 0, coupling, 0, 1, "0", "0", "t*u"));
}

Kernel separable_kernel() {
  return build_kernel(ModelParams::with_expressions(1, 0, 0, 0, 1, "0.3*t + log(1+u) + log(1+v)", "0", "0"));
}

// For K = exp(c(tu+tv)), L f(t) = A(t)^2 with A(t) = int e^{c t u} f(u) du.  The
// oracle runs Picard on that one-dimensional form with composite Simpson on a
// uniform 1024-interval grid, then evaluates the Nystrom extension at x.
class SimpsonOracle {
public:
  explicit SimpsonOracle(double c) : c_(c), x_(kPoints), w_(kPoints), f_(kPoints, 1.0) {
    const double h = 1.0 / (kPoints - 1);
    for (int i = 0; i < kPoints; ++i) {
      x_[i] = i * h;
      w_[i] = h / 3.0 * (i == 0 || i == kPoints - 1 ? 1.0 : (i % 2 ? 4.0 : 2.0));
    }
    for (int it = 0; it < 200; ++it) {
      std::vector<double> next(kPoints);
      double change = 0.0;
      for (int i = 0; i < kPoints; ++i) {
        next[i] = value(x_[i]);
        change = std::max(change, std::fabs(next[i] - f_[i]));
      }
      f_ = std::move(next);
      if (change < 1e-15) break;
    }
  }

  double value(double t) const {
    const double a = moment(t) / moment(0.0);
    return a * a;
  }

private:
  static constexpr int kPoints = 1025;

  double moment(double t) const {
    double s = 0.0;
    for (int i = 0; i < kPoints; ++i) s += w_[i] * std::exp(c_ * t * x_[i]) * f_[i];
    return s;
  }

  double c_;
  std::vector<double> x_, w_, f_;
};

void check_in_g_bounds(const LyapunovOperator& op, const GridFunction& g) {
  const Kernel& k = op.kernel();
  const double lo = k.omega() / (k.Omega() * k.Omega());
  const double hi = k.Omega() / (k.omega() * k.omega());
  double sup = 0.0;
  for (int i = 0; i <= 100; ++i) {
    // L g = g, so the extension of g off the grid is L g.
    const double v = op.extend_L(g, i / 100.0);
    CHECK(v >= lo - 1e-9);
    CHECK(v <= hi + 1e-9);
    sup = std::max(sup, v);
  }
  CHECK(sup >= 1.0 / k.Omega() - 1e-9);
}

}  // namespace

TEST_CASE("config validation") {
  SolverConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.tol = 1e-7;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);  // tol must be below cluster_eps
  cfg = {};
  cfg.damping = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.damping = 1.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.starts = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.tol = -1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("solve_H closed-form examples") {
  const auto r = rule_of(32);
  const LyapunovOperator flat(constant_kernel(1.0), r);
  const FixedPointReport a = solve_H(flat, {}, GridFunction::constant(r, 5.0));
  CHECK(a.converged);
  CHECK(a.iterations == 1);
  CHECK(a.residual == 0.0);
  for (double x : a.solution.values()) CHECK(x == 1.0);
  CHECK(a.kind == SolutionKind::h_fixed);

  const LyapunovOperator sep(separable_kernel(), r);
  const FixedPointReport b = solve_H(sep, {}, GridFunction::sample(r, [](double t) { return 2.0 + std::sin(7 * t); }));
  CHECK(b.converged);
  CHECK(b.iterations <= 2);
  for (std::size_t i = 0; i < r->size(); ++i) CHECK(std::fabs(b.solution[i] - std::exp(0.3 * r->nodes[i])) < 1e-12);
  CHECK(std::fabs(sep.extend_H(b.solution, 0.0) - 1.0) < 1e-12);
}

TEST_CASE("solve_H agrees with a fine-grid Simpson Picard oracle") {
  const auto r = rule_of(32);
  const LyapunovOperator op(product_kernel(0.05), r);
  const FixedPointReport rep = solve_H(op, {}, GridFunction::constant(r, 1.0));
  REQUIRE(rep.converged);
  CHECK(rep.residual < 1e-12);
  const SimpsonOracle oracle(0.05);
  for (std::size_t i = 0; i < r->size(); ++i) CHECK(std::fabs(rep.solution[i] - oracle.value(r->nodes[i])) < 1e-8);

  // The stronger coupling exercises more iterations and the Newton polish.
  const LyapunovOperator strong(product_kernel(1.0), r);
  const FixedPointReport s = solve_H(strong, {}, GridFunction::constant(r, 1.0));
  REQUIRE(s.converged);
  const SimpsonOracle oracle1(1.0);
  for (std::size_t i = 0; i < r->size(); ++i) CHECK(std::fabs(s.solution[i] - oracle1.value(r->nodes[i])) < 1e-8);
}

TEST_CASE("solve_H re-verified residuals and damping") {
  const auto r = rule_of(24);
  const LyapunovOperator op(product_kernel(1.0), r);
  for (double d : {1.0, 0.7, 0.3}) {
    SolverConfig cfg;
    cfg.damping = d;
    const FixedPointReport rep = solve_H(op, cfg, GridFunction::constant(r, 3.0));
    CAPTURE(d);
    REQUIRE(rep.converged);
    CHECK(op.residual(rep.solution, Equation::H) < cfg.tol);
    CHECK(rep.residual == op.residual(rep.solution, Equation::H));
  }
  SolverConfig slow;
  slow.damping = 0.3;
  slow.newton_polish = false;
  SolverConfig fast = slow;
  fast.damping = 1.0;
  CHECK(solve_H(op, slow, GridFunction::constant(r, 3.0)).iterations >
        solve_H(op, fast, GridFunction::constant(r, 3.0)).iterations);
}

TEST_CASE("non-convergence is reported with the best iterate") {
  const auto r = rule_of(16);
  const LyapunovOperator op(product_kernel(1.0), r);
  SolverConfig cfg;
  cfg.max_iter = 2;
  cfg.newton_polish = false;
  const FixedPointReport rep = solve_H(op, cfg, GridFunction::constant(r, 9.0));
  CHECK_FALSE(rep.converged);
  CHECK(rep.iterations == 2);
  CHECK(rep.residual > cfg.tol);
  CHECK(rep.residual == doctest::Approx(op.residual(rep.solution, Equation::H)).epsilon(1e-15));
}

TEST_CASE("solve_L examples") {
  const auto r = rule_of(32);
  for (double kappa : {0.5, 1.0, 4.0}) {
    const LyapunovOperator op(constant_kernel(kappa), r);
    const FixedPointReport rep = solve_L(op, {}, GridFunction::constant(r, 1.0));
    CHECK(rep.converged);
    CHECK(rep.kind == SolutionKind::l_fixed);
    CHECK(rep.residual < 1e-13);
    for (double x : rep.solution.values()) CHECK(std::fabs(x - 1.0 / kappa) < 1e-12);
  }

  const LyapunovOperator op(product_kernel(0.05), r);
  const FixedPointReport rep = solve_L(op, {}, GridFunction::constant(r, 1.0));
  CHECK(rep.converged);
  CHECK(rep.residual < 1e-10);
  check_in_g_bounds(op, rep.solution);
}

TEST_CASE("fixed points of L stay in the a priori box") {
  const auto r = rule_of(32);
  for (const Kernel& k :
       {product_kernel(0.01), product_kernel(0.05), product_kernel(1.0), separable_kernel(), constant_kernel(4.0),
        build_kernel(ModelParams::with_expressions(0.6, -0.4, 0.5, 0.3, 1.2, "t*u*v", "cos(u*v)", "(t-u)^2"))}) {
    const LyapunovOperator op(k, r);
    const FixedPointReport rep = solve_L(op, {}, GridFunction::constant(r, 1.0));
    REQUIRE(rep.converged);
    check_in_g_bounds(op, rep.solution);
  }
}

TEST_CASE("eigenpairs by scaling") {
  const auto r = rule_of(16);
  const LyapunovOperator flat(constant_kernel(1.0), r);
  const FixedPointReport two = find_eigenpair(flat, {}, 2.0);
  CHECK(two.kind == SolutionKind::eigenpair);
  CHECK(two.lambda == 2.0);
  CHECK(two.converged);
  for (double x : two.solution.values()) CHECK(std::fabs(x - 2.0) < 1e-14);
  const FixedPointReport one = find_eigenpair(flat, {}, 1.0);
  for (double x : one.solution.values()) CHECK(std::fabs(x - 1.0) < 1e-14);

  const auto r32 = rule_of(32);
  const LyapunovOperator op(product_kernel(0.05), r32);
  const FixedPointReport three = find_eigenpair(op, {}, 3.0);
  CHECK(three.converged);
  CHECK(three.residual < 1e-9);

  const GridFunction g = solve_L(op, {}, GridFunction::constant(r32, 1.0)).solution;
  for (double lambda : {0.5, 2.0, 10.0}) {
    const GridFunction h = g.scaled(lambda);
    const GridFunction lh = op.apply_L(h);
    double res = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) res = std::max(res, std::fabs(lh[i] - lambda * h[i]));
    CHECK(res < 1e-9);
    CHECK(res < SolverConfig{}.tol * std::max(1.0, lambda * lambda));
  }
  CHECK_THROWS_AS(find_eigenpair(op, {}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(find_eigenpair(op, {}, -2.0), std::invalid_argument);
}

TEST_CASE("H and L fixed points correspond") {
  const auto r = rule_of(32);
  const LyapunovOperator one(constant_kernel(1.0), r);
  const GridFunction g1 = h_to_l(one, GridFunction::constant(r, 1.0));
  for (double x : g1.values()) CHECK(std::fabs(x - 1.0) < 1e-15);
  const LyapunovOperator four(constant_kernel(4.0), r);
  const GridFunction g4 = h_to_l(four, GridFunction::constant(r, 1.0));
  for (double x : g4.values()) CHECK(std::fabs(x - 0.25) < 1e-15);
  CHECK(four.residual(g4, Equation::L) < 1e-15);
  const GridFunction f4 = l_to_h(four, g4);
  for (double x : f4.values()) CHECK(std::fabs(x - 1.0) < 1e-14);

  for (double c : {0.05, 1.0}) {
    const LyapunovOperator op(product_kernel(c), r);
    const FixedPointReport fh = solve_H(op, {}, GridFunction::constant(r, 1.0));
    const GridFunction g = h_to_l(op, fh.solution);
    CHECK(op.residual(g, Equation::L) < 1e-10);
    const GridFunction back = l_to_h(op, g);
    for (std::size_t i = 0; i < r->size(); ++i) CHECK(std::fabs(back[i] - fh.solution[i]) < 1e-12);

    // Two paths to the same H fixed point.
    const FixedPointReport fl = solve_L(op, {}, GridFunction::constant(r, 2.0));
    CHECK(sup_distance(l_to_h(op, fl.solution), fh.solution) < 1e-9);
  }
}

TEST_CASE("random starts are reproducible and log-uniform") {
  const auto r = rule_of(8);
  const auto a = random_starts(r, 50, 123);
  const auto b = random_starts(r, 50, 123);
  const auto c = random_starts(r, 50, 124);
  REQUIRE(a.size() == 50);
  bool differs = false;
  double lo = HUGE_VAL, hi = 0.0, mean_log = 0.0;
  for (std::size_t s = 0; s < a.size(); ++s)
    for (std::size_t i = 0; i < r->size(); ++i) {
      CHECK(a[s][i] == b[s][i]);
      differs = differs || a[s][i] != c[s][i];
      lo = std::min(lo, a[s][i]);
      hi = std::max(hi, a[s][i]);
      mean_log += std::log(a[s][i]);
    }
  CHECK(differs);
  CHECK(lo >= 0.1);
  CHECK(hi <= 10.0);
  CHECK(std::fabs(mean_log / 400.0) < 0.25);  // log-uniform is centred on log 1
}

TEST_CASE("multi_start clustering") {
  const auto r = rule_of(32);
  SolverConfig cfg;
  cfg.seed = 7;

  const MultiStartResult flat = multi_start(LyapunovOperator(constant_kernel(2.0), r), cfg);
  CHECK(flat.reports.size() == 20);
  CHECK(flat.converged_count() == 20);
  CHECK(flat.distinct_count == 1);
  CHECK(*flat.max_residual() < 1e-12);

  const LyapunovOperator weak(product_kernel(0.05), r);
  const MultiStartResult u = multi_start(weak, cfg);
  CHECK(u.distinct_count == 1);
  for (std::size_t i = 0; i < u.reports.size(); ++i) {
    CHECK(u.cluster[i] == 0);
    CHECK(weak.residual(u.reports[i].solution, Equation::H) < cfg.tol);
  }

  const MultiStartResult strong = multi_start(LyapunovOperator(product_kernel(1.0), r), cfg);
  CHECK(strong.distinct_count >= 1);
  CHECK(*strong.min_residual() < 1e-10);
}

TEST_CASE("multi_start is deterministic") {
  const auto r = rule_of(16);
  const LyapunovOperator op(product_kernel(1.0), r);
  SolverConfig cfg;
  cfg.seed = 99;
  cfg.starts = 6;
  const MultiStartResult a = multi_start(op, cfg);
  const MultiStartResult b = multi_start(op, cfg);
  REQUIRE(a.reports.size() == b.reports.size());
  for (std::size_t s = 0; s < a.reports.size(); ++s) {
    CHECK(a.reports[s].iterations == b.reports[s].iterations);
    CHECK(a.reports[s].residual == b.reports[s].residual);
    for (std::size_t i = 0; i < r->size(); ++i) CHECK(a.reports[s].solution[i] == b.reports[s].solution[i]);
  }
  CHECK(a.cluster == b.cluster);
}

TEST_CASE("non-converged starts are excluded from clustering") {
  const auto r = rule_of(16);
  SolverConfig cfg;
  cfg.max_iter = 1;
  cfg.newton_polish = false;
  cfg.starts = 4;
  const MultiStartResult m = multi_start(LyapunovOperator(product_kernel(1.0), r), cfg);
  CHECK(m.converged_count() == 0);
  CHECK(m.distinct_count == 0);
  CHECK_FALSE(m.min_residual().has_value());
  for (int c : m.cluster) CHECK(c == -1);
}
