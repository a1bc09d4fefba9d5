#include "ensel/single_body.hpp"

#include <algorithm>
#include <limits>
#include <vector>

namespace ensel {

double gaussian_expect(const std::function<double(double)>& g, double sd,
                       const QuadratureRule<double>& rule) {
  if (!(sd > 0.0)) return g(0.0);
  return gauss_hermite_expect([&](double x) { return g(sd * x); }, rule);
}

FieldAverages field_averages(const LocalField& field, double lambda, double rho) {
  const double v_hat = std::max(field.v_hat, 0.0);
  const double var_null = std::max(field.chi_hat, 0.0);
  const double var_signal = field.m_hat * field.m_hat + var_null;

  // Quantities linear in the eta-average collapse to one Gaussian of
  // variance var + v_hat.
  const auto total_null = soft_threshold_gaussian_moments(0.0, var_null + v_hat, lambda, field.q_hat);
  const auto total_signal =
      soft_threshold_gaussian_moments(0.0, var_signal + v_hat, lambda, field.q_hat);

  FieldAverages out;
  out.chi = ((1.0 - rho) * total_null.nonzero_prob + rho * total_signal.nonzero_prob) / field.q_hat;
  out.m = rho * field.m_hat * total_signal.nonzero_prob / field.q_hat;

  if (v_hat <= 0.0) {
    out.q = (1.0 - rho) * total_null.second_moment + rho * total_signal.second_moment;
    out.v = 0.0;
    return out;
  }

  // Var_eta w(a) is a narrow bump around |a| = lambda when v_hat is small,
  // so the outer average is integrated adaptively with breakpoints there;
  // q then follows from the exact second moment.
  const auto eta_variance = [&](double a) {
    const auto mom = soft_threshold_gaussian_moments(a, v_hat, lambda, field.q_hat);
    return std::max(mom.second_moment - mom.mean * mom.mean, 0.0);
  };
  const double scale = v_hat / (field.q_hat * field.q_hat);
  const auto branch_variance = [&](double sd) {
    if (!(sd > 0.0)) return eta_variance(0.0);
    const double reach = 10.0 * sd + lambda + 10.0 * std::sqrt(v_hat);
    std::vector<double> cuts{-reach, -lambda, 0.0, lambda, reach};
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    const auto integrand = [&](double a) { return gauss_density(a / sd) / sd * eta_variance(a); };
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      acc += integrate_adaptive(integrand, cuts[k], cuts[k + 1], 1e-13 * scale);
    }
    return acc;
  };

  const double v_null = rho < 1.0 ? branch_variance(std::sqrt(var_null)) : 0.0;
  const double v_signal = rho > 0.0 ? branch_variance(std::sqrt(var_signal)) : 0.0;
  out.v = std::max((1.0 - rho) * v_null + rho * v_signal, 0.0);
  const double second = (1.0 - rho) * total_null.second_moment + rho * total_signal.second_moment;
  out.q = std::max(second - out.v, 0.0);
  return out;
}

FieldAverages field_averages_hermite(const LocalField& field, double lambda, double rho,
                                     const QuadratureRule<double>& rule) {
  const double v_hat = std::max(field.v_hat, 0.0);
  const auto branch = [&](double sd, double weight_signal) {
    FieldAverages acc;
    if (!(weight_signal > 0.0)) return acc;
    const auto moment = [&](double a) {
      return soft_threshold_gaussian_moments(a, v_hat, lambda, field.q_hat);
    };
    acc.q = gaussian_expect([&](double a) { const double e = moment(a).mean; return e * e; }, sd, rule);
    acc.v = gaussian_expect([&](double a) {
      const auto mom = moment(a);
      return std::max(mom.second_moment - mom.mean * mom.mean, 0.0);
    }, sd, rule);
    acc.chi = gaussian_expect([&](double a) { return moment(a).mean_derivative; }, sd, rule);
    return acc;
  };
  const FieldAverages null = branch(field.null_sd(), 1.0 - rho);
  const FieldAverages signal = branch(field.signal_sd(), rho);
  // E[w0 w] on the signal branch by Gaussian integration by parts.
  const double m = rho * field.m_hat * field.m_hat / (field.m_hat * field.m_hat + field.chi_hat) *
                   gaussian_expect([&](double a) {
                     return a * soft_threshold_gaussian_moments(a, v_hat, lambda, field.q_hat).mean;
                   }, field.signal_sd(), rule) / field.m_hat;
  FieldAverages out;
  out.q = (1.0 - rho) * null.q + rho * signal.q;
  out.v = (1.0 - rho) * null.v + rho * signal.v;
  out.chi = (1.0 - rho) * null.chi + rho * signal.chi;
  out.m = field.m_hat != 0.0 ? m : 0.0;
  return out;
}

double critical_field(const std::function<double(double)>& prob, double pi_th) {
  if (prob(0.0) > pi_th) return 0.0;
  double hi = 1.0;
  while (!(prob(hi) > pi_th)) {
    hi *= 2.0;
    if (hi > 1e12) return std::numeric_limits<double>::infinity();
  }
  return bisect_boundary([&](double a) { return prob(a) > pi_th; }, 0.0, hi, 1e-14 * hi);
}

double selected_mass(double a_c, double sd, bool zero_field_selected) {
  if (std::isinf(a_c)) return 0.0;
  if (!(sd > 0.0)) return zero_field_selected ? 1.0 : 0.0;
  if (a_c <= 0.0) return 1.0;
  return 2.0 * gauss_upper_tail(a_c / sd);
}

}  // namespace ensel
