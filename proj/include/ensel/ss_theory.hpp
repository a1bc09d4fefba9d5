#ifndef ENSEL_SS_THEORY_HPP
#define ENSEL_SS_THEORY_HPP

// Self-consistent description of stability selection: the bootstrap lasso
// behaves coordinate-wise like a scalar soft threshold with local field
// h = m_hat w0 + sqrt(chi_hat) xi + sqrt(v_hat) eta, where eta carries the
// resampling noise given the data.

#include "ensel/fixed_point.hpp"
#include "ensel/problem.hpp"
#include "ensel/single_body.hpp"

namespace ensel {

struct SsOrderParams {
  double q = 0.0;
  double m = 0.0;
  double chi = 0.0;
  double v = 0.0;
};

struct SsHatParams {
  double q_hat = 1.0;
  double m_hat = 1.0;
  double chi_hat = 0.0;
  double v_hat = 0.0;

  LocalField field() const { return {m_hat, chi_hat, v_hat, q_hat}; }
};

/// How many times each data point enters one randomized fit.
enum class Resampling {
  kPoisson,  ///< bootstrap with rate mu_b, counts ~ Poisson(mu_b)
  kSingle,   ///< every point exactly once: the plain lasso
};

struct SsSolution {
  ProblemConfig config;
  Resampling resampling = Resampling::kPoisson;
  SsOrderParams order;
  SsHatParams hats;
  FixedPointReport report;
};

SsHatParams ss_hat_update(const SsOrderParams& order, const ProblemConfig& config,
                          Resampling resampling = Resampling::kPoisson,
                          const TheoryNumerics& numerics = default_numerics());

SsOrderParams ss_order_update(const SsHatParams& hats, const ProblemConfig& config);

SsSolution solve_ss(const ProblemConfig& config, const SolverSettings& settings = {},
                    const TheoryNumerics& numerics = default_numerics());

/// The single (non-resampled) lasso as the c == 1 specialization.
SsSolution vanilla_lasso_solution(const ProblemConfig& config, const SolverSettings& settings = {},
                                  const TheoryNumerics& numerics = default_numerics());

/// Pi_SS(xi, w0): probability over eta that the coordinate is nonzero.
double ss_selection_probability(double xi, double w0, const SsSolution& sol);

/// Same, as a function of the deterministic field a = m_hat w0 + sqrt(chi_hat) xi.
double ss_selection_probability_at(double field, const SsSolution& sol);

Rates ss_tpr_fdr(const SsSolution& sol, double pi_th);

/// Expected fresh-sample squared error of one resampled lasso draw,
/// (q + v) - 2m + rho + Delta.
double ss_prediction_error(const SsSolution& sol);

}  // namespace ensel

#endif  // ENSEL_SS_THEORY_HPP
