#include "ensel/recon_limit.hpp"

#include "ensel/special_math.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace ensel {
namespace {

constexpr double kVMin = 1e-12;
constexpr double kVMax = 1e12;

// The V equation divided by V reads F(tau) = alpha with tau = 1/sqrt(V); F
// is minimized where rho tau = 2 (1 - rho) (phi(tau) - tau H(tau)). The
// left side increases and the right side decreases in tau.
double stationary_tau(double rho) {
  if (rho >= 1.0) return 0.0;
  if (rho <= 0.0) return std::numeric_limits<double>::infinity();
  const auto excess = [&](double tau) {
    return rho * tau - 2.0 * (1.0 - rho) * (gauss_density(tau) - tau * gauss_upper_tail(tau));
  };
  double hi = 1.0;
  while (excess(hi) < 0.0) hi *= 2.0;
  return bisect_boundary([&](double tau) { return excess(tau) >= 0.0; }, 0.0, hi, 1e-15);
}

}  // namespace

std::string ReconAlgorithm::label() const {
  if (kind == Kind::kDko) return "dko";
  std::ostringstream os;
  os << "ss_mu" << mu_b;
  return os.str();
}

double v_equation_residual(double v, double alpha_eff, double rho_eff) {
  const double root_v = std::sqrt(v);
  const double x = 1.0 / root_v;
  const double rhs =
      2.0 * (1.0 - rho_eff) * ((1.0 + v) * gauss_upper_tail(x) - root_v * gauss_density(x)) +
      rho_eff * (1.0 + v);
  return rhs - alpha_eff * v;
}

double solve_v(double alpha_eff, double rho_eff) {
  if (!(alpha_eff > 0.0) || !(rho_eff >= 0.0 && rho_eff <= 1.0)) {
    throw std::invalid_argument("solve_v: need alpha_eff > 0 and rho_eff in [0, 1]");
  }
  const auto g = [&](double log_v) { return v_equation_residual(std::exp(log_v), alpha_eff, rho_eff); };

  const double tau_star = stationary_tau(rho_eff);
  const double v_star = tau_star > 0.0 ? std::min(1.0 / (tau_star * tau_star), kVMax) : kVMax;
  double lo = std::log(kVMin);
  double hi = std::log(std::max(v_star, kVMin));
  if (g(hi) > 0.0) {
    throw NoFiniteRootError("solve_v: no finite V (alpha_eff at or below the reconstruction boundary)");
  }
  if (g(lo) <= 0.0) {
    // Widen towards zero; the residual tends to rho_eff > 0 there.
    while (g(lo) <= 0.0 && lo > std::log(1e-300)) lo -= 10.0;
    if (g(lo) <= 0.0) throw NoFiniteRootError("solve_v: root not bracketed");
  }
  for (int it = 0; it < 300; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  const double v_lo = std::exp(lo);
  const double v_hi = std::exp(hi);
  return std::abs(v_equation_residual(v_lo, alpha_eff, rho_eff)) <
                 std::abs(v_equation_residual(v_hi, alpha_eff, rho_eff))
             ? v_lo
             : v_hi;
}

bool perfect_recovery_condition(const EffectiveDims& dims) {
  double v = 0.0;
  try {
    v = solve_v(dims.alpha_eff, dims.rho_eff);
  } catch (const NoFiniteRootError&) {
    return false;
  }
  const double threshold =
      2.0 * (1.0 - dims.rho_eff) * gauss_upper_tail(1.0 / std::sqrt(v)) + dims.rho_eff;
  return dims.alpha_eff > threshold;
}

EffectiveDims effective_dims(const ReconAlgorithm& algorithm, double alpha, double rho) {
  if (algorithm.kind == ReconAlgorithm::Kind::kDko) return {0.5 * alpha, 0.5 * rho};
  return {-std::expm1(-algorithm.mu_b) * alpha, rho};
}

std::vector<PhasePoint> phase_boundary_curve(const ReconAlgorithm& algorithm,
                                             std::span<const double> rho_grid, double rel_tol) {
  std::vector<PhasePoint> out;
  out.reserve(rho_grid.size());
  for (const double rho : rho_grid) {
    const auto recovers = [&](double alpha) {
      return perfect_recovery_condition(effective_dims(algorithm, alpha, rho));
    };
    double lo = 1e-4;
    double hi = 10.0;
    while (recovers(lo) && lo > 1e-300) lo *= 0.5;
    while (!recovers(hi) && hi < 1e300) hi *= 2.0;
    while ((hi - lo) > rel_tol * hi) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      (recovers(mid) ? hi : lo) = mid;
    }
    out.push_back({rho, hi, algorithm});
  }
  return out;
}

}  // namespace ensel
