#ifndef ENSEL_RECON_LIMIT_HPP
#define ENSEL_RECON_LIMIT_HPP

// Noiseless l1 perfect-reconstruction boundary expressed through the
// effective sample ratio and sparsity seen by one randomized fit.

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ensel {

struct EffectiveDims {
  double alpha_eff = 1.0;  ///< unique data points per parameter
  double rho_eff = 0.5;    ///< nonzeros per parameter
};

struct ReconAlgorithm {
  enum class Kind { kSs, kDko };
  Kind kind = Kind::kSs;
  double mu_b = 1.0;  ///< used by kSs only

  std::string label() const;
};

struct PhasePoint {
  double rho = 0.0;
  double alpha_critical = 0.0;
  ReconAlgorithm algorithm;
};

/// The V equation has no positive root: the effective ratio lies at or
/// below the reconstruction boundary.
class NoFiniteRootError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Residual rhs - lhs of
///   alpha V = 2 (1 - rho) ((1 + V) H(1/sqrt V) - sqrt(V) phi(1/sqrt V)) + rho (1 + V).
double v_equation_residual(double v, double alpha_eff, double rho_eff);

/// Smallest positive root of the V equation (the branch on which the
/// reconstruction condition holds). Throws NoFiniteRootError.
double solve_v(double alpha_eff, double rho_eff);

/// alpha_eff > 2 (1 - rho_eff) H(1/sqrt V) + rho_eff at V = solve_v(...);
/// false when no finite V exists.
bool perfect_recovery_condition(const EffectiveDims& dims);

EffectiveDims effective_dims(const ReconAlgorithm& algorithm, double alpha, double rho);

/// Critical alpha (original units) for each rho, bisected to `rel_tol`.
std::vector<PhasePoint> phase_boundary_curve(const ReconAlgorithm& algorithm,
                                             std::span<const double> rho_grid,
                                             double rel_tol = 1e-12);

}  // namespace ensel

#endif  // ENSEL_RECON_LIMIT_HPP
