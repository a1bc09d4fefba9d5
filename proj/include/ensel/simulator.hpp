#ifndef ENSEL_SIMULATOR_HPP
#define ENSEL_SIMULATOR_HPP

// Finite-size Monte Carlo counterpart of the theories: synthetic
// Gauss-Bernoulli regression data, bootstrap / knockoff randomization,
// empirical selection frequencies, order parameters and TPR/FDR.

#include "ensel/lasso.hpp"
#include "ensel/power_curve.hpp"
#include "ensel/problem.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ensel {

struct Dataset {
  Eigen::MatrixXd design;     ///< M x N, entries N(0, 1/N)
  Eigen::VectorXd responses;  ///< design * truth + N(0, delta) noise
  Eigen::VectorXd truth;      ///< Gauss-Bernoulli coefficients

  Eigen::Index rows() const { return design.rows(); }
  Eigen::Index cols() const { return design.cols(); }
};

/// splitmix64 mix of (parent, index): independent child streams.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index);

Dataset generate_dataset(int n, const ProblemConfig& config, std::uint64_t seed);

/// Multiplicities of round(mu_b * m) draws with replacement from m points.
Eigen::VectorXi bootstrap_counts(int m, double mu_b, std::uint64_t seed);

/// Model-X knockoff copy for i.i.d. N(0, I/n) rows.
Eigen::MatrixXd generate_knockoff(int m, int n, std::uint64_t seed);

/// Per-dataset statistics at one lambda.
struct DatasetRecord {
  double lambda = 0.0;
  Eigen::VectorXd selection_prob;  ///< Pi_hat_i
  double q = 0.0;
  double m = 0.0;
  double v = 0.0;
  double v_knock = 0.0;     ///< knockoff runs only
  double knock_mean = 0.0;  ///< mean_i mean_r w_tilde_i, knockoff runs only
};

/// Stability selection over `repeats` bootstrap draws for every lambda in
/// `lambdas` (records in the same order). q is debiased for the finite
/// number of draws and v uses the unbiased variance.
std::vector<DatasetRecord> ss_empirical_path(const Dataset& data, std::span<const double> lambdas,
                                             double mu_b, int repeats, std::uint64_t seed,
                                             const LassoSettings& settings = {});

DatasetRecord ss_empirical(const Dataset& data, double lambda, double mu_b, int repeats,
                           std::uint64_t seed, const LassoSettings& settings = {});

/// Knockoff lasso on [X, X_tilde] over `repeats` knockoff draws; Pi_hat_i is
/// the frequency of |w_i| - |w_tilde_i| > z_th.
std::vector<DatasetRecord> dko_empirical_path(const Dataset& data, std::span<const double> lambdas,
                                              double z_th, int repeats, std::uint64_t seed,
                                              const LassoSettings& settings = {});

DatasetRecord dko_empirical(const Dataset& data, double lambda, double z_th, int repeats,
                            std::uint64_t seed, const LassoSettings& settings = {});

/// The plain lasso on the full data: Pi_hat in {0, 1}, v = 0.
std::vector<DatasetRecord> lasso_empirical_path(const Dataset& data,
                                                std::span<const double> lambdas,
                                                const LassoSettings& settings = {});

/// TPR/FDR of the set {i : Pi_i > pi_th}; 0 when undefined.
Rates empirical_tpr_fdr(const Eigen::VectorXd& selection_prob, const Eigen::VectorXd& truth,
                        double pi_th);

/// Expected rates of a single randomized selection with per-coordinate
/// probabilities Pi_i (vanilla knockoffs): sum-of-probabilities ratios.
Rates empirical_expected_tpr_fdr(const Eigen::VectorXd& selection_prob,
                                 const Eigen::VectorXd& truth);

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
};

struct EmpiricalResult {
  Method algorithm = Method::kSs;
  ProblemConfig config;
  SelectionThresholds thresholds;
  int n = 0;
  int m = 0;
  int repeats = 0;
  int data_realizations = 0;
  std::uint64_t master_seed = 0;
  std::vector<std::uint64_t> data_seeds;
  std::vector<std::uint64_t> draw_seeds;
  Eigen::VectorXd selection_prob;  ///< Pi_hat of realization 0
  /// Named statistics in a fixed order (q, m, v, [v_knock, knock_mean], tpr, fdr).
  std::vector<std::pair<std::string, Estimate>> statistics;

  bool has(const std::string& name) const;
  const Estimate& at(const std::string& name) const;
};

struct ExperimentOptions {
  int workers = 1;
  LassoSettings lasso;
};

class SimulationError : public std::runtime_error {
 public:
  SimulationError(const std::string& what, int realization)
      : std::runtime_error(what), realization_(realization) {}
  int realization() const { return realization_; }

 private:
  int realization_;
};

/// Full protocol over `data_realizations` independent datasets, one result
/// per lambda in `lambdas` (config.lambda is ignored). Realization k uses
/// data seed derive_seed(master, 2k) and draw seed derive_seed(master, 2k+1).
std::vector<EmpiricalResult> run_experiment_path(int n, const ProblemConfig& config,
                                                 std::span<const double> lambdas,
                                                 Method algorithm, int repeats,
                                                 int data_realizations,
                                                 const SelectionThresholds& thresholds,
                                                 std::uint64_t master_seed,
                                                 const ExperimentOptions& options = {});

EmpiricalResult run_experiment(int n, const ProblemConfig& config, Method algorithm, int repeats,
                               int data_realizations, const SelectionThresholds& thresholds,
                               std::uint64_t master_seed, const ExperimentOptions& options = {});

}  // namespace ensel

#endif  // ENSEL_SIMULATOR_HPP
