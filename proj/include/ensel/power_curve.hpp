#ifndef ENSEL_POWER_CURVE_HPP
#define ENSEL_POWER_CURVE_HPP

// Power (TPR at a given FDR) curves from the asymptotic theories, and the
// prediction-error-optimal regularization strength.

#include "ensel/dko_theory.hpp"
#include "ensel/ss_theory.hpp"

#include <span>
#include <string>
#include <vector>

namespace ensel {

enum class Method { kSs, kDko, kKo, kLasso };

Method parse_method(const std::string& name);
std::string to_string(Method method);

struct PowerPoint {
  double threshold = 0.0;  ///< pi_th (SS), z_th (KO, dKO) or lambda (lasso)
  double fdr = 0.0;
  double tpr = 0.0;
};

using PowerCurve = std::vector<PowerPoint>;

PowerCurve ss_power_curve(const SsSolution& sol, std::span<const double> pi_grid);
PowerCurve dko_power_curve(const DkoSolution& sol, std::span<const double> z_grid,
                           double pi_th = 0.025);
PowerCurve ko_power_curve(const DkoSolution& sol, std::span<const double> z_grid);
/// Plain lasso: the support of the estimate is the selection, swept over lambda.
PowerCurve lasso_power_curve(const ProblemConfig& config, std::span<const double> lambda_grid,
                             const SolverSettings& settings = {});

std::vector<double> linspace(double lo, double hi, int n);
std::vector<double> logspace(double lo, double hi, int n);

/// Default sweeps wide enough to run the curve from (FDR, TPR) near
/// (0, 0) up to selecting everything.
std::vector<double> default_pi_grid();
std::vector<double> default_z_grid(const DkoSolution& sol);
std::vector<double> default_lambda_grid();

/// Largest TPR at which the curve, walked in sweep order, crosses the
/// target FDR. Curves entirely below the target give their largest TPR,
/// curves entirely above give 0.
double tpr_at_fdr(const PowerCurve& curve, double target_fdr);

/// Prediction error of the theory for `method` at config.lambda. KO shares
/// the dKO fit.
double theory_prediction_error(Method method, const ProblemConfig& config,
                               const SolverSettings& settings = {});

struct LambdaOptimum {
  double lambda = 0.0;
  double prediction_error = 0.0;
};

/// Golden-section search over log(lambda) in [lo, hi].
LambdaOptimum optimal_lambda(Method method, const ProblemConfig& config,
                             const SolverSettings& settings = {}, double lo = 1e-3,
                             double hi = 10.0, double log_tol = 1e-3);

/// Curve for `method` at config.lambda using the default sweep.
PowerCurve theory_power_curve(Method method, const ProblemConfig& config,
                              const SolverSettings& settings = {}, double dko_pi_th = 0.025);

}  // namespace ensel

#endif  // ENSEL_POWER_CURVE_HPP
