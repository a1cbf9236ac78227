#ifndef LYAPFIX_SOLVER_HPP
#define LYAPFIX_SOLVER_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "lyapfix/operators.hpp"

namespace lyapfix {

class SolverError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct SolverConfig {
  double tol = 1e-12;        // sup-norm residual target
  int max_iter = 1000;
  double damping = 1.0;      // f <- (1-d) f + d Hf
  int starts = 20;
  std::uint64_t seed = 0;
  double cluster_eps = 1e-8;
  bool newton_polish = true;

  /// Throws std::invalid_argument on tol >= cluster_eps, damping outside (0,1], etc.
  void validate() const;
};

enum class SolutionKind { h_fixed, l_fixed, eigenpair };

const char* to_string(SolutionKind kind);

struct FixedPointReport {
  GridFunction solution;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  SolutionKind kind = SolutionKind::h_fixed;
  double lambda = 1.0;  // eigenvalue for SolutionKind::eigenpair
};

/// Damped Picard iteration on H with a single optional Newton step once the
/// residual drops below 1e-6.  Non-convergence is reported, not thrown; the
/// best iterate seen is returned.  Throws SolverError if an iterate leaves the
/// positive cone.
FixedPointReport solve_H(const LyapunovOperator& op, const SolverConfig& cfg, const GridFunction& start);

/// Fixed point of L obtained from an H fixed point via h_to_l.  The residual
/// is measured on L g = g.
FixedPointReport solve_L(const LyapunovOperator& op, const SolverConfig& cfg, const GridFunction& start);

/// (lambda, h) with L h = lambda h, built as h = lambda g from an L fixed point.
/// Converged means ||L h - lambda h|| < tol * max(1, lambda^2).
FixedPointReport find_eigenpair(const LyapunovOperator& op, const SolverConfig& cfg, double lambda,
                                const GridFunction& start);
FixedPointReport find_eigenpair(const LyapunovOperator& op, const SolverConfig& cfg, double lambda);

/// g = f / D(f), D(f) = int int K(0,u,v) f(u) f(v) du dv.
GridFunction h_to_l(const LyapunovOperator& op, const GridFunction& f);

/// f = g / (L g)(0).
GridFunction l_to_h(const LyapunovOperator& op, const GridFunction& g);

/// Start values log-uniform in [0.1, 10] per node, reproducible from seed.
std::vector<GridFunction> random_starts(std::shared_ptr<const QuadratureRule> rule, int count, std::uint64_t seed);

struct MultiStartResult {
  std::vector<FixedPointReport> reports;  // one per start, start order
  std::vector<int> cluster;               // cluster id per report, -1 if not converged
  std::vector<std::size_t> representatives;
  int distinct_count = 0;

  std::size_t converged_count() const;
  std::optional<double> min_residual() const;  // over converged reports
  std::optional<double> max_residual() const;
};

/// Runs solve_H from cfg.starts random starts and clusters converged
/// solutions greedily by sup distance < cfg.cluster_eps.
MultiStartResult multi_start(const LyapunovOperator& op, const SolverConfig& cfg);

}  // namespace lyapfix

#endif  // LYAPFIX_SOLVER_HPP
