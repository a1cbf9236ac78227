#include "lyapfix/solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace lyapfix {

void SolverConfig::validate() const {
  if (!(tol > 0.0)) throw std::invalid_argument("solver.tol must be positive");
  if (max_iter < 0) throw std::invalid_argument("solver.max_iter must be non-negative");
  if (!(damping > 0.0 && damping <= 1.0)) throw std::invalid_argument("solver.damping must lie in (0, 1]");
  if (starts < 1) throw std::invalid_argument("solver.starts must be at least 1");
  if (!(cluster_eps > 0.0)) throw std::invalid_argument("solver.cluster_eps must be positive");
  if (!(tol < cluster_eps)) throw std::invalid_argument("solver.tol must be smaller than solver.cluster_eps");
}

const char* to_string(SolutionKind kind) {
  switch (kind) {
    case SolutionKind::h_fixed: return "H-fixed";
    case SolutionKind::l_fixed: return "L-fixed";
    case SolutionKind::eigenpair: return "eigenpair";
  }
  return "?";
}

namespace {

constexpr double kPolishThreshold = 1e-6;

std::optional<GridFunction> newton_step(const LyapunovOperator& op, const GridFunction& f, const GridFunction& hf) {
  const auto n = static_cast<Eigen::Index>(f.size());
  Eigen::MatrixXd system = op.jacobian_H(f) - Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) rhs(i) = f[static_cast<std::size_t>(i)] - hf[static_cast<std::size_t>(i)];
  const Eigen::VectorXd step = system.partialPivLu().solve(rhs);
  std::vector<double> next(f.size());
  for (std::size_t i = 0; i < next.size(); ++i) {
    next[i] = f[i] + step(static_cast<Eigen::Index>(i));
    if (!(next[i] > 0.0) || !std::isfinite(next[i])) return std::nullopt;
  }
  return GridFunction(f.rule_ptr(), std::move(next));
}

}  // namespace

FixedPointReport solve_H(const LyapunovOperator& op, const SolverConfig& cfg, const GridFunction& start) {
  cfg.validate();
  GridFunction f = start;
  GridFunction hf = op.apply_H(f);
  double res = sup_distance(hf, f);

  GridFunction best = f;
  double best_res = res;
  bool polished = !cfg.newton_polish;
  int it = 0;

  while (!(res < cfg.tol) && it < cfg.max_iter) {
    ++it;
    std::vector<double> next(f.size());
    for (std::size_t i = 0; i < next.size(); ++i) {
      next[i] = (1.0 - cfg.damping) * f[i] + cfg.damping * hf[i];
      if (!(next[i] > 0.0) || !std::isfinite(next[i]))
        throw SolverError("iterate left the positive cone at iteration " + std::to_string(it) + ", node " +
                          std::to_string(i) + "; reduce solver.damping");
    }
    f = GridFunction(f.rule_ptr(), std::move(next));
    hf = op.apply_H(f);
    res = sup_distance(hf, f);

    if (!polished && res < kPolishThreshold) {
      polished = true;
      if (auto candidate = newton_step(op, f, hf)) {
        GridFunction hc = op.apply_H(*candidate);
        const double rc = sup_distance(hc, *candidate);
        if (rc < res) {
          f = std::move(*candidate);
          hf = std::move(hc);
          res = rc;
        }
      }
    }
    if (res < best_res) {
      best = f;
      best_res = res;
    }
  }

  const bool converged = res < cfg.tol;
  return FixedPointReport{converged ? f : best, converged ? res : best_res, it, converged, SolutionKind::h_fixed,
                          1.0};
}

GridFunction h_to_l(const LyapunovOperator& op, const GridFunction& f) {
  const double d = op.denominator(f);
  if (!(d > 0.0) || !std::isfinite(d)) throw SolverError("h_to_l: denominator is not positive and finite");
  return f.scaled(1.0 / d);
}

GridFunction l_to_h(const LyapunovOperator& op, const GridFunction& g) {
  const double at_zero = op.extend_L(g, 0.0);
  if (!(at_zero > 0.0) || !std::isfinite(at_zero))
    throw SolverError("l_to_h: (Lg)(0) is not positive and finite");
  return g.scaled(1.0 / at_zero);
}

FixedPointReport solve_L(const LyapunovOperator& op, const SolverConfig& cfg, const GridFunction& start) {
  FixedPointReport h = solve_H(op, cfg, start);
  // L g - g = (Hf - f) / D, so a small D needs a tighter H residual.
  if (h.converged) {
    const double d = op.denominator(h.solution);
    if (d < 1.0) {
      SolverConfig tighter = cfg;
      tighter.tol = cfg.tol * d;
      FixedPointReport again = solve_H(op, tighter, h.solution);
      again.iterations += h.iterations;
      if (again.residual <= h.residual) {
        again.converged = true;  // still below the caller's tol
        h = std::move(again);
      }
    }
  }
  GridFunction g = h_to_l(op, h.solution);
  const double res = op.residual(g, Equation::L);
  return FixedPointReport{std::move(g), res, h.iterations, h.converged && res < cfg.tol, SolutionKind::l_fixed, 1.0};
}

FixedPointReport find_eigenpair(const LyapunovOperator& op, const SolverConfig& cfg, double lambda,
                                const GridFunction& start) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("eigenvalue must be positive");
  FixedPointReport l = solve_L(op, cfg, start);
  GridFunction h = l.solution.scaled(lambda);
  const GridFunction lh = op.apply_L(h);
  double res = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) res = std::max(res, std::fabs(lh[i] - lambda * h[i]));
  const bool converged = l.converged && res < cfg.tol * std::max(1.0, lambda * lambda);
  return FixedPointReport{std::move(h), res, l.iterations, converged, SolutionKind::eigenpair, lambda};
}

FixedPointReport find_eigenpair(const LyapunovOperator& op, const SolverConfig& cfg, double lambda) {
  return find_eigenpair(op, cfg, lambda, GridFunction::constant(op.rule_ptr(), 1.0));
}

std::vector<GridFunction> random_starts(std::shared_ptr<const QuadratureRule> rule, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double lo = std::log(0.1);
  const double hi = std::log(10.0);
  std::vector<GridFunction> starts;
  starts.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int s = 0; s < count; ++s) {
    std::vector<double> values(rule->size());
    for (double& v : values) {
      // 53 random bits; std::uniform_real_distribution is not portable.
      const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      v = std::exp(lo + unit * (hi - lo));
    }
    starts.emplace_back(rule, std::move(values));
  }
  return starts;
}

std::size_t MultiStartResult::converged_count() const {
  return static_cast<std::size_t>(std::count_if(reports.begin(), reports.end(), [](const auto& r) { return r.converged; }));
}

std::optional<double> MultiStartResult::min_residual() const {
  std::optional<double> out;
  for (const auto& r : reports)
    if (r.converged && (!out || r.residual < *out)) out = r.residual;
  return out;
}

std::optional<double> MultiStartResult::max_residual() const {
  std::optional<double> out;
  for (const auto& r : reports)
    if (r.converged && (!out || r.residual > *out)) out = r.residual;
  return out;
}

MultiStartResult multi_start(const LyapunovOperator& op, const SolverConfig& cfg) {
  cfg.validate();
  MultiStartResult out;
  for (const GridFunction& start : random_starts(op.rule_ptr(), cfg.starts, cfg.seed)) {
    out.reports.push_back(solve_H(op, cfg, start));
    out.cluster.push_back(-1);
  }
  for (std::size_t i = 0; i < out.reports.size(); ++i) {
    if (!out.reports[i].converged) continue;
    for (std::size_t c = 0; c < out.representatives.size(); ++c) {
      if (sup_distance(out.reports[i].solution, out.reports[out.representatives[c]].solution) < cfg.cluster_eps) {
        out.cluster[i] = static_cast<int>(c);
        break;
      }
    }
    if (out.cluster[i] < 0) {
      out.cluster[i] = static_cast<int>(out.representatives.size());
      out.representatives.push_back(i);
    }
  }
  out.distinct_count = static_cast<int>(out.representatives.size());
  return out;
}

}  // namespace lyapfix
