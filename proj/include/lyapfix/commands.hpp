#ifndef LYAPFIX_COMMANDS_HPP
#define LYAPFIX_COMMANDS_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lyapfix/config.hpp"

namespace lyapfix {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitNoConvergence = 3,
  kExitFeasibility = 4,
};

struct RunOptions {
  bool timings = true;
  std::optional<std::string> field_override;  // verify-consistency only
};

/// One CSV row: sweep_value, omega, Omega, ratio, satisfied, distinct_count, min_residual.
struct CsvRow {
  std::optional<double> sweep_value;
  double omega = 0.0;
  double Omega = 0.0;
  double ratio = 0.0;
  bool satisfied = false;
  int distinct_count = 0;
  std::optional<double> min_residual;
};

struct RunReport {
  nlohmann::ordered_json json;
  std::vector<CsvRow> rows;
  int exit_code = kExitOk;
};

RunReport run_solve(const ExperimentConfig& cfg, const RunOptions& opts = {});
/// command is "bounds" or "check-uniqueness"; both report the same kernel block.
RunReport run_check(const ExperimentConfig& cfg, const RunOptions& opts = {}, const std::string& command = "check-uniqueness");
RunReport run_verify(const ExperimentConfig& cfg, const RunOptions& opts = {});
RunReport run_sweep(const ExperimentConfig& cfg, const RunOptions& opts = {});

void write_csv(std::ostream& out, const std::vector<CsvRow>& rows);

/// Full command-line entry point; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

inline constexpr double kCompatibilityTol = 1e-6;
inline constexpr double kConsistencyTol = 1e-8;

}  // namespace lyapfix

#endif  // LYAPFIX_COMMANDS_HPP
