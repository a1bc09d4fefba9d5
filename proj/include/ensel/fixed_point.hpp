#ifndef ENSEL_FIXED_POINT_HPP
#define ENSEL_FIXED_POINT_HPP

#include <Eigen/Core>

#include <functional>
#include <span>
#include <stdexcept>

namespace ensel {

struct SolverSettings {
  double damping = 0.5;  ///< weight of the new iterate, in (0, 1]
  double tol = 1e-10;    ///< sup-norm residual target
  int max_iter = 10000;
  double min_clip = 1e-14;  ///< floor for variance-like coordinates

  void validate() const;
};

struct FixedPointReport {
  Eigen::VectorXd solution;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Thrown when the update map produces a non-finite vector.
class DivergedError : public std::runtime_error {
 public:
  DivergedError(const std::string& what, Eigen::VectorXd last_finite, int iteration)
      : std::runtime_error(what), last_finite_(std::move(last_finite)), iteration_(iteration) {}

  const Eigen::VectorXd& last_finite() const { return last_finite_; }
  int iteration() const { return iteration_; }

 private:
  Eigen::VectorXd last_finite_;
  int iteration_;
};

using UpdateMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Damped iteration x <- (1 - d) x + d update(x). Stops once
/// ||update(x) - x||_inf <= tol and returns that x; coordinates listed in
/// `clipped` are floored at min_clip after every step.
FixedPointReport solve_damped(const UpdateMap& update, Eigen::VectorXd init,
                              const SolverSettings& settings,
                              std::span<const Eigen::Index> clipped = {});

}  // namespace ensel

#endif  // ENSEL_FIXED_POINT_HPP
