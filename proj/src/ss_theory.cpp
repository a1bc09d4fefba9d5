#include "ensel/ss_theory.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace ensel {
namespace {

// State layout of the composite map: order parameters, then hats.
constexpr Eigen::Index kQ = 0, kM = 1, kChi = 2, kV = 3;
constexpr Eigen::Index kQHat = 4, kMHat = 5, kChiHat = 6, kVHat = 7;

Eigen::VectorXd pack(const SsOrderParams& o, const SsHatParams& h) {
  Eigen::VectorXd x(8);
  x << o.q, o.m, o.chi, o.v, h.q_hat, h.m_hat, h.chi_hat, h.v_hat;
  return x;
}

SsOrderParams unpack_order(const Eigen::VectorXd& x) { return {x[kQ], x[kM], x[kChi], x[kV]}; }

SsHatParams unpack_hats(const Eigen::VectorXd& x) {
  return {x[kQHat], x[kMHat], x[kChiHat], x[kVHat]};
}

SsSolution solve_composite(const ProblemConfig& config, Resampling resampling,
                           const SolverSettings& settings, const TheoryNumerics& numerics) {
  config.validate();
  SsOrderParams init{config.rho, 0.5 * config.rho, 1.0, 0.1};
  std::vector<Eigen::Index> clipped{kQ, kChi, kChiHat};
  if (resampling == Resampling::kSingle) {
    // v = 0 is the exact fixed point; keeping it at zero selects the
    // closed-form branch of the order update.
    init.v = 0.0;
  } else {
    clipped.push_back(kV);
    clipped.push_back(kVHat);
  }

  const UpdateMap update = [&](const Eigen::VectorXd& x) {
    const SsHatParams hats = ss_hat_update(unpack_order(x), config, resampling, numerics);
    return pack(ss_order_update(hats, config), hats);
  };

  SsSolution sol;
  sol.config = config;
  sol.resampling = resampling;
  sol.report = solve_damped(update, pack(init, ss_hat_update(init, config, resampling, numerics)),
                            settings, clipped);
  sol.order = unpack_order(sol.report.solution);
  sol.hats = unpack_hats(sol.report.solution);
  return sol;
}

}  // namespace

SsHatParams ss_hat_update(const SsOrderParams& order, const ProblemConfig& config,
                          Resampling resampling, const TheoryNumerics& numerics) {
  if (!std::isfinite(order.q) || !std::isfinite(order.m) || !std::isfinite(order.chi) ||
      !std::isfinite(order.v)) {
    throw std::domain_error("ss_hat_update: non-finite order parameters");
  }
  if (order.chi < 0.0) throw std::domain_error("ss_hat_update: negative susceptibility");

  double f1 = 0.0;
  double f2 = 0.0;
  if (resampling == Resampling::kSingle) {
    f1 = 1.0 / (1.0 + order.chi);
    f2 = f1 * f1;
  } else {
    const auto ratio = [&](long c) { return c / (1.0 + order.chi * c); };
    f1 = poisson_truncated_expect(config.mu_b, ratio, numerics.poisson_mass_tol);
    f2 = poisson_truncated_expect(
        config.mu_b, [&](long c) { return ratio(c) * ratio(c); }, numerics.poisson_mass_tol);
  }

  const double residual = order.q - 2.0 * order.m + config.rho + config.delta;
  SsHatParams hats;
  hats.q_hat = hats.m_hat = config.alpha * f1;
  hats.chi_hat = std::max(config.alpha * f1 * f1 * residual, 0.0);
  hats.v_hat = std::max(config.alpha * ((f2 - f1 * f1) * residual + order.v * f2), 0.0);
  return hats;
}

SsOrderParams ss_order_update(const SsHatParams& hats, const ProblemConfig& config) {
  if (!(hats.q_hat > 0.0)) throw std::domain_error("ss_order_update: q_hat must be positive");
  const FieldAverages avg = field_averages(hats.field(), config.lambda, config.rho);
  return {avg.q, avg.m, avg.chi, avg.v};
}

SsSolution solve_ss(const ProblemConfig& config, const SolverSettings& settings,
                    const TheoryNumerics& numerics) {
  return solve_composite(config, Resampling::kPoisson, settings, numerics);
}

SsSolution vanilla_lasso_solution(const ProblemConfig& config, const SolverSettings& settings,
                                  const TheoryNumerics& numerics) {
  return solve_composite(config, Resampling::kSingle, settings, numerics);
}

double ss_selection_probability_at(double field, const SsSolution& sol) {
  return soft_threshold_gaussian_moments(field, sol.hats.v_hat, sol.config.lambda, sol.hats.q_hat)
      .nonzero_prob;
}

double ss_selection_probability(double xi, double w0, const SsSolution& sol) {
  const double a = sol.hats.m_hat * w0 + std::sqrt(std::max(sol.hats.chi_hat, 0.0)) * xi;
  return ss_selection_probability_at(a, sol);
}

Rates ss_tpr_fdr(const SsSolution& sol, double pi_th) {
  const auto prob = [&](double a) { return ss_selection_probability_at(a, sol); };
  const double a_c = critical_field(prob, pi_th);
  const bool zero_selected = prob(0.0) > pi_th;
  const LocalField field = sol.hats.field();
  const double signal = selected_mass(a_c, field.signal_sd(), zero_selected);
  const double null = selected_mass(a_c, field.null_sd(), zero_selected);
  const double rho = sol.config.rho;
  return {rho > 0.0 ? signal : 0.0, false_discovery_rate(rho, null, signal)};
}

double ss_prediction_error(const SsSolution& sol) {
  const auto& o = sol.order;
  return (o.q + o.v) - 2.0 * o.m + sol.config.rho + sol.config.delta;
}

}  // namespace ensel
