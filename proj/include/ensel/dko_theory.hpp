#ifndef ENSEL_DKO_THEORY_HPP
#define ENSEL_DKO_THEORY_HPP

// Self-consistent description of the knockoff lasso on [X, X_tilde]. The
// real coefficient sees h = m_hat w0 + sqrt(chi_hat) xi + sqrt(v_hat) eta;
// the knockoff coefficient sees only sqrt(v_hat_knock) eta_tilde.

#include "ensel/fixed_point.hpp"
#include "ensel/problem.hpp"
#include "ensel/single_body.hpp"

namespace ensel {

struct DkoOrderParams {
  double q = 0.0;
  double m = 0.0;
  double chi = 0.0;
  double v = 0.0;
  double v_knock = 0.0;
  double chi_knock = 0.0;
};

struct DkoHatParams {
  double q_hat = 1.0;
  double q_hat_knock = 1.0;
  double m_hat = 1.0;
  double chi_hat = 0.0;
  double v_hat = 0.0;
  double v_hat_knock = 0.0;

  LocalField field() const { return {m_hat, chi_hat, v_hat, q_hat}; }
};

struct DkoSolution {
  ProblemConfig config;
  DkoOrderParams order;
  DkoHatParams hats;
  FixedPointReport report;
};

DkoHatParams dko_hat_update(const DkoOrderParams& order, const ProblemConfig& config);

DkoOrderParams dko_order_update(const DkoHatParams& hats, const ProblemConfig& config);

/// (v_knock, chi_knock) of the knockoff coordinate, which depend on the
/// hats only through v_hat_knock and q_hat_knock.
std::pair<double, double> knockoff_statistics(double v_hat_knock, double q_hat_knock, double lambda);

DkoSolution solve_dko(const ProblemConfig& config, const SolverSettings& settings = {});

/// P_{eta, eta_tilde}(|w| - |w_tilde| > z_th) at deterministic field a.
double dko_selection_probability_at(double field, double z_th, const DkoSolution& sol);

double dko_selection_probability(double xi, double w0, double z_th, const DkoSolution& sol);

/// Derandomized knockoffs: threshold the selection probability at pi_th.
Rates dko_tpr_fdr(const DkoSolution& sol, const SelectionThresholds& thresholds);

/// Vanilla knockoffs: a single knockoff draw, so rates average the
/// probability itself.
Rates vanilla_ko_tpr_fdr(const DkoSolution& sol, double z_th);

/// (q + v) - 2m + rho + Delta + v_knock.
double dko_prediction_error(const DkoSolution& sol);

}  // namespace ensel

#endif  // ENSEL_DKO_THEORY_HPP
