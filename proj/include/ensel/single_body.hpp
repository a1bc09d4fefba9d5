#ifndef ENSEL_SINGLE_BODY_HPP
#define ENSEL_SINGLE_BODY_HPP

// Averages of the scalar soft-threshold estimator w(h), with local field
// h = m_hat w0 + sqrt(chi_hat) xi + sqrt(v_hat) eta, over the
// Gauss-Bernoulli truth w0, the data noise xi and the algorithmic noise eta.
// The deterministic part a = m_hat w0 + sqrt(chi_hat) xi is N(0, chi_hat)
// on the null branch and N(0, m_hat^2 + chi_hat) on the signal branch.

#include "ensel/problem.hpp"

#include <functional>

namespace ensel {

struct LocalField {
  double m_hat = 0.0;
  double chi_hat = 0.0;
  double v_hat = 0.0;
  double q_hat = 1.0;

  double null_sd() const { return std::sqrt(std::max(chi_hat, 0.0)); }
  double signal_sd() const { return std::sqrt(std::max(m_hat * m_hat + chi_hat, 0.0)); }
};

struct FieldAverages {
  double q = 0.0;    ///< E_{xi,w0}[E_eta[w]^2]
  double m = 0.0;    ///< E[w0 w]
  double chi = 0.0;  ///< E[dw/dh]
  double v = 0.0;    ///< E_{xi,w0}[Var_eta w]
};

/// Order-parameter averages for the field: chi, m and E[w^2] in closed
/// form, v by adaptive quadrature over a (zero when v_hat == 0).
FieldAverages field_averages(const LocalField& field, double lambda, double rho);

/// Same averages computed purely by Gauss-Hermite over a. Cheaper, but
/// under-resolves v when v_hat is small; kept as a cross-check.
FieldAverages field_averages_hermite(const LocalField& field, double lambda, double rho,
                                     const QuadratureRule<double>& rule);

/// E_a[g(a)] with a ~ N(0, sd^2); sd == 0 evaluates g(0).
double gaussian_expect(const std::function<double(double)>& g, double sd,
                       const QuadratureRule<double>& rule);

/// Smallest a_c >= 0 with {|a| > a_c} == {prob(a) > pi_th}, for a
/// selection probability even and nondecreasing in |a|. Returns +inf when
/// nothing can be selected.
double critical_field(const std::function<double(double)>& prob, double pi_th);

/// P(|a| > a_c) for a ~ N(0, sd^2), honoring the strict inequality when
/// sd == 0 via prob(0) > pi_th.
double selected_mass(double a_c, double sd, bool zero_field_selected);

}  // namespace ensel

#endif  // ENSEL_SINGLE_BODY_HPP
