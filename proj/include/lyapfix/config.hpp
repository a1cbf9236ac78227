#ifndef LYAPFIX_CONFIG_HPP
#define LYAPFIX_CONFIG_HPP

#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "lyapfix/kernel.hpp"
#include "lyapfix/solver.hpp"

namespace lyapfix {

/// Schema violation; the message starts with the offending field path.
class ConfigError : public std::runtime_error {
public:
  ConfigError(const std::string& path, const std::string& what);
  const std::string& path() const { return path_; }

private:
  std::string path_;
};

struct SweepSpec {
  std::string parameter;  // beta, J1, J3, J or alpha
  double from = 0.0;
  double to = 0.0;
  int steps = 2;

  double value(int step) const;
};

struct TreeSpec {
  int k = 2;
  int n = 1;
  int quadrature_nodes = 16;
};

/// Experiment description read from JSON:
///
///   {
///     "model":      {"J3", "J", "J1", "alpha", "beta" (required), "xi1", "xi2", "xi3"},
///     "quadrature": {"nodes"},
///     "bounds":     {"grid", "refine"},
///     "solver":     {"tol", "max_iter", "damping", "starts", "seed", "cluster_eps", "newton_polish"},
///     "tree":       {"k", "n", "quadrature_nodes"},
///     "sweep":      {"parameter", "from", "to", "steps"}
///   }
///
/// Unknown keys are rejected at every level.
struct ExperimentConfig {
  double J3 = 0.0;
  double J = 0.0;
  double J1 = 0.0;
  double alpha = 0.0;
  double beta = 1.0;
  std::string xi1 = "0";
  std::string xi2 = "0";
  std::string xi3 = "0";

  int quadrature_nodes = 32;
  BoundsOptions bounds;
  SolverConfig solver;
  TreeSpec tree;
  std::optional<SweepSpec> sweep;

  static ExperimentConfig from_json(const nlohmann::json& doc);
  static ExperimentConfig load(const std::string& path);

  /// Full config with defaults filled in, keys in schema order.
  nlohmann::ordered_json to_json() const;

  /// Parses the interaction expressions; ConfigError names the bad field.
  ModelParams model_params() const;

  /// Copy with one coupling (or beta) replaced, for sweeps.
  ExperimentConfig with_parameter(const std::string& name, double value) const;
};

}  // namespace lyapfix

#endif  // LYAPFIX_CONFIG_HPP
