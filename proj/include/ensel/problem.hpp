#ifndef ENSEL_PROBLEM_HPP
#define ENSEL_PROBLEM_HPP

#include "ensel/special_math.hpp"

namespace ensel {

/// Model and algorithm parameters shared by theory and simulator.
struct ProblemConfig {
  double alpha = 2.5;   ///< M / N
  double rho = 0.3;     ///< fraction of nonzero true coefficients
  double delta = 0.01;  ///< noise variance
  double lambda = 0.1;  ///< l1 strength on the unnormalized objective
  double mu_b = 1.0;    ///< bootstrap size / M (stability selection only)

  void validate() const;
};

/// Thresholds used to turn selection probabilities into a selected set.
struct SelectionThresholds {
  double z_th = 0.05;  ///< LCD threshold (knockoffs)
  double pi_th = 0.15;
};

/// Integration settings for the theory modules.
struct TheoryNumerics {
  QuadratureRule<double> rule;
  double poisson_mass_tol = 1e-12;

  explicit TheoryNumerics(int hermite_nodes = 101, double mass_tol = 1e-12);
};

const TheoryNumerics& default_numerics();

struct Rates {
  double tpr = 0.0;
  double fdr = 0.0;
};

/// FDR from selection masses; 0 when nothing is selected.
inline double false_discovery_rate(double rho, double null_mass, double signal_mass) {
  const double selected = rho * signal_mass + (1.0 - rho) * null_mass;
  if (!(selected > 0.0)) return 0.0;
  return std::clamp((1.0 - rho) * null_mass / selected, 0.0, 1.0);
}

}  // namespace ensel

#endif  // ENSEL_PROBLEM_HPP
