#include "ensel/dko_theory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace ensel {
namespace {

constexpr Eigen::Index kQ = 0, kM = 1, kChi = 2, kV = 3, kVKnock = 4, kChiKnock = 5;
constexpr Eigen::Index kQHat = 6, kQHatKnock = 7, kMHat = 8, kChiHat = 9, kVHat = 10,
                       kVHatKnock = 11;

Eigen::VectorXd pack(const DkoOrderParams& o, const DkoHatParams& h) {
  Eigen::VectorXd x(12);
  x << o.q, o.m, o.chi, o.v, o.v_knock, o.chi_knock, h.q_hat, h.q_hat_knock, h.m_hat, h.chi_hat,
      h.v_hat, h.v_hat_knock;
  return x;
}

DkoOrderParams unpack_order(const Eigen::VectorXd& x) {
  return {x[kQ], x[kM], x[kChi], x[kV], x[kVKnock], x[kChiKnock]};
}

DkoHatParams unpack_hats(const Eigen::VectorXd& x) {
  DkoHatParams h{x[kQHat], x[kQHatKnock], x[kMHat], x[kChiHat], x[kVHat], x[kVHatKnock]};
  h.q_hat_knock = h.q_hat;
  h.v_hat_knock = h.chi_hat + h.v_hat;
  return h;
}

/// P(|w| > c) for w = soft_threshold(a + s eta, lambda) / q_hat.
double magnitude_tail(double a, double s, double lambda, double q_hat, double c) {
  const double threshold = lambda + q_hat * c;
  if (!(s > 0.0)) return std::abs(a) > threshold ? 1.0 : 0.0;
  return gauss_upper_tail((threshold - a) / s) + gauss_upper_tail((threshold + a) / s);
}

}  // namespace

DkoHatParams dko_hat_update(const DkoOrderParams& order, const ProblemConfig& config) {
  const double d = 1.0 + order.chi + order.chi_knock;
  if (!std::isfinite(d) || !std::isfinite(order.q) || !std::isfinite(order.m) ||
      !std::isfinite(order.v) || !std::isfinite(order.v_knock)) {
    throw std::domain_error("dko_hat_update: non-finite order parameters");
  }
  if (!(d > 0.0)) throw std::domain_error("dko_hat_update: 1 + chi + chi_knock must be positive");

  const double scale = config.alpha / (d * d);
  DkoHatParams hats;
  hats.q_hat = hats.q_hat_knock = config.alpha / d;
  hats.m_hat = hats.q_hat;
  hats.chi_hat = std::max(scale * (order.q - 2.0 * order.m + config.rho + config.delta), 0.0);
  hats.v_hat = std::max(scale * (order.v + order.v_knock), 0.0);
  hats.v_hat_knock = hats.chi_hat + hats.v_hat;
  return hats;
}

std::pair<double, double> knockoff_statistics(double v_hat_knock, double q_hat_knock,
                                              double lambda) {
  const auto mom = soft_threshold_gaussian_moments(0.0, v_hat_knock, lambda, q_hat_knock);
  return {mom.second_moment, mom.nonzero_prob / q_hat_knock};
}

DkoOrderParams dko_order_update(const DkoHatParams& hats, const ProblemConfig& config) {
  if (!(hats.q_hat > 0.0) || !(hats.q_hat_knock > 0.0)) {
    throw std::domain_error("dko_order_update: q_hat must be positive");
  }
  const FieldAverages avg = field_averages(hats.field(), config.lambda, config.rho);
  const auto [v_knock, chi_knock] =
      knockoff_statistics(hats.v_hat_knock, hats.q_hat_knock, config.lambda);
  return {avg.q, avg.m, avg.chi, avg.v, v_knock, chi_knock};
}

DkoSolution solve_dko(const ProblemConfig& config, const SolverSettings& settings) {
  config.validate();
  const DkoOrderParams init{config.rho, 0.5 * config.rho, 1.0, 0.1, 0.1, 1.0};
  // Hats come straight out of dko_hat_update (already floored at zero);
  // clipping them would break v_hat_knock = chi_hat + v_hat.
  const std::vector<Eigen::Index> clipped{kQ, kChi, kV, kVKnock, kChiKnock};

  const UpdateMap update = [&](const Eigen::VectorXd& x) {
    const DkoHatParams hats = dko_hat_update(unpack_order(x), config);
    return pack(dko_order_update(hats, config), hats);
  };

  DkoSolution sol;
  sol.config = config;
  sol.report = solve_damped(update, pack(init, dko_hat_update(init, config)), settings, clipped);
  sol.order = unpack_order(sol.report.solution);
  sol.hats = unpack_hats(sol.report.solution);
  return sol;
}

double dko_selection_probability_at(double field, double z_th, const DkoSolution& sol) {
  const double lambda = sol.config.lambda;
  const double q_hat = sol.hats.q_hat;
  const double q_hat_knock = sol.hats.q_hat_knock;
  const double s = std::sqrt(std::max(sol.hats.v_hat, 0.0));
  const double s_knock = std::sqrt(std::max(sol.hats.v_hat_knock, 0.0));

  const double at_zero_knock = magnitude_tail(field, s, lambda, q_hat, z_th);
  if (!(s_knock > 0.0)) return at_zero_knock;

  // |w_tilde| is 0 with probability 1 - 2 H(t0), else (s_knock |t| - lambda) / q_hat_knock
  // for |t| > t0 = lambda / s_knock.
  const double t0 = lambda / s_knock;
  const double atom = 1.0 - 2.0 * gauss_upper_tail(t0);
  const auto integrand = [&](double t) {
    const double knock = (s_knock * t - lambda) / q_hat_knock;
    return gauss_density(t) * magnitude_tail(field, s, lambda, q_hat, z_th + knock);
  };
  const double continuous = 2.0 * integrate_adaptive(integrand, t0, t0 + 12.0, 1e-14);
  return std::clamp(atom * at_zero_knock + continuous, 0.0, 1.0);
}

double dko_selection_probability(double xi, double w0, double z_th, const DkoSolution& sol) {
  const double a = sol.hats.m_hat * w0 + std::sqrt(std::max(sol.hats.chi_hat, 0.0)) * xi;
  return dko_selection_probability_at(a, z_th, sol);
}

Rates dko_tpr_fdr(const DkoSolution& sol, const SelectionThresholds& thresholds) {
  const auto prob = [&](double a) { return dko_selection_probability_at(a, thresholds.z_th, sol); };
  const double a_c = critical_field(prob, thresholds.pi_th);
  const bool zero_selected = prob(0.0) > thresholds.pi_th;
  const LocalField field = sol.hats.field();
  const double signal = selected_mass(a_c, field.signal_sd(), zero_selected);
  const double null = selected_mass(a_c, field.null_sd(), zero_selected);
  const double rho = sol.config.rho;
  return {rho > 0.0 ? signal : 0.0, false_discovery_rate(rho, null, signal)};
}

Rates vanilla_ko_tpr_fdr(const DkoSolution& sol, double z_th) {
  const auto prob = [&](double a) { return dko_selection_probability_at(a, z_th, sol); };
  const double lambda = sol.config.lambda;
  const double step = lambda + sol.hats.q_hat * std::max(z_th, 0.0);
  // Pi is even in a and nearly a step at |a| = lambda + q_hat z when v_hat is small.
  const auto average = [&](double sd) {
    if (!(sd > 0.0)) return prob(0.0);
    constexpr double kReach = 12.0;
    std::vector<double> cuts{0.0, kReach};
    for (double c : {lambda / sd, step / sd}) {
      if (c > 0.0 && c < kReach) cuts.push_back(c);
    }
    std::sort(cuts.begin(), cuts.end());
    const auto integrand = [&](double t) { return 2.0 * gauss_density(t) * prob(sd * t); };
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      acc += integrate_adaptive(integrand, cuts[k], cuts[k + 1], 1e-12);
    }
    return acc;
  };
  const LocalField field = sol.hats.field();
  const double signal = average(field.signal_sd());
  const double null = average(field.null_sd());
  const double rho = sol.config.rho;
  return {rho > 0.0 ? signal : 0.0, false_discovery_rate(rho, null, signal)};
}

double dko_prediction_error(const DkoSolution& sol) {
  const auto& o = sol.order;
  return (o.q + o.v) - 2.0 * o.m + sol.config.rho + sol.config.delta + o.v_knock;
}

}  // namespace ensel
