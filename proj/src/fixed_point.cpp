#include "ensel/fixed_point.hpp"

#include <algorithm>
#include <string>

namespace ensel {

void SolverSettings::validate() const {
  if (!(damping > 0.0 && damping <= 1.0)) throw std::invalid_argument("damping must lie in (0, 1]");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (max_iter < 1) throw std::invalid_argument("max_iter must be positive");
  if (!(min_clip >= 0.0)) throw std::invalid_argument("min_clip must be nonnegative");
}

FixedPointReport solve_damped(const UpdateMap& update, Eigen::VectorXd init,
                              const SolverSettings& settings,
                              std::span<const Eigen::Index> clipped) {
  settings.validate();
  Eigen::VectorXd x = std::move(init);
  for (const Eigen::Index i : clipped) x[i] = std::max(x[i], settings.min_clip);

  FixedPointReport report;
  for (int it = 1; it <= settings.max_iter; ++it) {
    Eigen::VectorXd next = update(x);
    if (next.size() != x.size()) throw std::logic_error("update map changed the vector length");
    if (!next.allFinite()) {
      throw DivergedError("fixed-point update returned a non-finite value at iteration " +
                              std::to_string(it),
                          x, it);
    }
    report.iterations = it;
    report.residual = (next - x).lpNorm<Eigen::Infinity>();
    if (report.residual <= settings.tol) {
      report.converged = true;
      break;
    }
    x = (1.0 - settings.damping) * x + settings.damping * next;
    for (const Eigen::Index i : clipped) x[i] = std::max(x[i], settings.min_clip);
  }
  report.solution = std::move(x);
  return report;
}

}  // namespace ensel
