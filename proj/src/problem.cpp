#include "ensel/problem.hpp"

#include <cmath>
#include <stdexcept>

namespace ensel {

void ProblemConfig::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be positive");
  if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("rho must lie in [0, 1]");
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw std::invalid_argument("delta must be nonnegative");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be positive");
  if (!(mu_b > 0.0) || !std::isfinite(mu_b)) throw std::invalid_argument("mu_b must be positive");
}

TheoryNumerics::TheoryNumerics(int hermite_nodes, double mass_tol)
    : rule(gauss_hermite_rule<double>(hermite_nodes)), poisson_mass_tol(mass_tol) {}

const TheoryNumerics& default_numerics() {
  static const TheoryNumerics numerics;
  return numerics;
}

}  // namespace ensel
