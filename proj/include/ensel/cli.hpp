#ifndef ENSEL_CLI_HPP
#define ENSEL_CLI_HPP

// Command-line front end. Every command writes its table to a stream so
// the same code path serves the executable and the tests.

#include "ensel/fixed_point.hpp"
#include "ensel/power_curve.hpp"
#include "ensel/problem.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ensel {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitNumerical = 2,
  kExitVerdict = 3,
};

/// Invalid command line or configuration file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;
  Method method = Method::kSs;
  bool method_given = false;  ///< lambda-opt: otherwise report every method
  ProblemConfig problem;
  SelectionThresholds thresholds;
  double dko_pi_th = 0.025;  ///< fixed Pi_th along dKO power curves
  SolverSettings solver;

  std::vector<double> lambda_grid;     ///< empty: use problem.lambda
  std::vector<double> rho_grid;        ///< phase-boundary sweep
  std::vector<double> threshold_grid;  ///< power-curve sweep, empty: default
  bool lambda_given = false;           ///< power-curve: skip the lambda search

  int n = 64;
  int repeats = 128;
  int realizations = 200;
  std::uint64_t seed = 0;
  int workers = 1;

  std::string out;  ///< empty: stdout
  std::string theory_path;
  std::string empirical_path;

  /// Lambdas for solve/simulate/compare, ascending.
  std::vector<double> lambdas() const;
  void validate() const;
};

/// Parses "a,b,c", "lin:lo:hi:n" or "log:lo:hi:n".
std::vector<double> parse_grid(const std::string& text);

/// Merges a JSON configuration file into `config` (unknown keys are errors).
void apply_config_file(const std::string& path, RunConfig& config);

int cmd_solve(const RunConfig& config, std::ostream& out);
int cmd_power_curve(const RunConfig& config, std::ostream& out, std::ostream& log);
int cmd_phase_boundary(const RunConfig& config, std::ostream& out);
int cmd_simulate(const RunConfig& config, std::ostream& out);
int cmd_compare(const RunConfig& config, std::ostream& out, std::ostream& log);
int cmd_lambda_opt(const RunConfig& config, std::ostream& out);

/// Verdict of one (statistic, lambda) cell.
struct CompareRow {
  std::string statistic;
  double lambda = 0.0;
  double theory = 0.0;
  double empirical = 0.0;
  double std_error = 0.0;
  double z = 0.0;  ///< |theory - empirical| / SE; 0 or inf when SE == 0
  bool pass = false;
};

/// Overall rule: at least 90% of cells within 4 SE and none beyond 6 SE.
/// Cells with SE == 0 pass iff |theory - empirical| <= 1e-8.
bool compare_overall_pass(const std::vector<CompareRow>& rows);
CompareRow compare_cell(std::string statistic, double lambda, double theory, double empirical,
                        double std_error);

/// Full entry point: parse, dispatch, map failures to exit codes.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ensel

#endif  // ENSEL_CLI_HPP
