#ifndef ENSEL_LASSO_HPP
#define ENSEL_LASSO_HPP

// Cyclic coordinate descent for the count-weighted lasso
//   (1/2) sum_mu c_mu (y_mu - x_mu . w)^2 + lambda ||w||_1
// on the raw (unstandardized, no intercept) objective.

#include "ensel/special_math.hpp"

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>
#include <string>

namespace ensel {

struct LassoSettings {
  double tol = 1e-11;      ///< max coordinate change per sweep at convergence
  int max_sweeps = 100000;
  double kkt_tol = 1e-8;
};

class LassoNotConverged : public std::runtime_error {
 public:
  LassoNotConverged(const std::string& what, Eigen::VectorXd last_iterate, double kkt_residual)
      : std::runtime_error(what), last_(std::move(last_iterate)), kkt_residual_(kkt_residual) {}

  const Eigen::VectorXd& last_iterate() const { return last_; }
  double kkt_residual() const { return kkt_residual_; }

 private:
  Eigen::VectorXd last_;
  double kkt_residual_;
};

/// Lasso in covariance form: keeps G = X^T C X and X^T C y so a path of
/// lambdas (or warm restarts) costs O(N^2) per sweep independent of M.
template <typename Scalar>
class GramLasso {
 public:
  using MatrixType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using VectorType = Vector<Scalar>;

  template <typename DerivedX, typename DerivedY, typename DerivedW>
  GramLasso(const Eigen::MatrixBase<DerivedX>& design, const Eigen::MatrixBase<DerivedY>& responses,
            const Eigen::MatrixBase<DerivedW>& weights) {
    if (design.rows() != responses.size() || design.rows() != weights.size()) {
      throw std::invalid_argument("GramLasso: design, responses and weights disagree in length");
    }
    if ((weights.array() < Scalar(0)).any()) {
      throw std::invalid_argument("GramLasso: weights must be nonnegative");
    }
    const MatrixType scaled = weights.cwiseSqrt().asDiagonal() * design;
    gram_ = scaled.transpose() * scaled;
    const VectorType weighted = weights.cwiseProduct(responses);
    corr_ = design.transpose() * weighted;
  }

  Eigen::Index dim() const { return corr_.size(); }
  const MatrixType& gram() const { return gram_; }
  const VectorType& correlation() const { return corr_; }

  /// X^T C (y - X w): minus the gradient of the smooth part.
  VectorType residual_correlation(const VectorType& w) const { return corr_ - gram_ * w; }

  /// Largest violation of the lasso optimality conditions.
  Scalar kkt_residual(const VectorType& w, Scalar lambda) const {
    const VectorType g = residual_correlation(w);
    Scalar worst{0};
    for (Eigen::Index j = 0; j < w.size(); ++j) {
      const Scalar violation = w[j] != Scalar(0)
                                   ? std::abs(g[j] - lambda * (w[j] > 0 ? Scalar(1) : Scalar(-1)))
                                   : std::max(std::abs(g[j]) - lambda, Scalar(0));
      worst = std::max(worst, violation);
    }
    return worst;
  }

  VectorType solve(Scalar lambda, const LassoSettings& settings) const {
    return solve(lambda, settings, VectorType::Zero(dim()));
  }

  VectorType solve(Scalar lambda, const LassoSettings& settings, VectorType w) const {
    if (!(lambda > Scalar(0))) throw std::invalid_argument("lasso: lambda must be positive");
    if (w.size() != dim()) throw std::invalid_argument("lasso: warm start has the wrong length");
    VectorType g = residual_correlation(w);
    for (int sweep = 1; sweep <= settings.max_sweeps; ++sweep) {
      Scalar max_change{0};
      for (Eigen::Index j = 0; j < dim(); ++j) {
        const Scalar diag = gram_(j, j);
        if (!(diag > Scalar(0))) {
          w[j] = Scalar(0);
          continue;
        }
        const Scalar updated = soft_threshold(g[j] + diag * w[j], lambda) / diag;
        const Scalar step = updated - w[j];
        if (step != Scalar(0)) {
          g.noalias() -= gram_.col(j) * step;
          w[j] = updated;
          max_change = std::max(max_change, std::abs(step));
        }
      }
      if (max_change <= Scalar(settings.tol)) {
        g = residual_correlation(w);  // drop accumulated round-off
        if (kkt_residual(w, lambda) <= Scalar(settings.kkt_tol)) return w;
      }
    }
    const Scalar kkt = kkt_residual(w, lambda);
    throw LassoNotConverged("lasso coordinate descent hit max_sweeps (KKT residual " +
                                std::to_string(static_cast<double>(kkt)) + ")",
                            w.template cast<double>(), static_cast<double>(kkt));
  }

 private:
  MatrixType gram_;
  VectorType corr_;
};

template <typename DerivedX, typename DerivedY, typename DerivedW>
Vector<typename DerivedX::Scalar> lasso_coordinate_descent(
    const Eigen::MatrixBase<DerivedX>& design, const Eigen::MatrixBase<DerivedY>& responses,
    typename DerivedX::Scalar lambda, const Eigen::MatrixBase<DerivedW>& weights,
    const LassoSettings& settings = {}) {
  return GramLasso<typename DerivedX::Scalar>(design, responses, weights).solve(lambda, settings);
}

template <typename DerivedX, typename DerivedY>
Vector<typename DerivedX::Scalar> lasso_coordinate_descent(
    const Eigen::MatrixBase<DerivedX>& design, const Eigen::MatrixBase<DerivedY>& responses,
    typename DerivedX::Scalar lambda, const LassoSettings& settings = {}) {
  using Scalar = typename DerivedX::Scalar;
  return lasso_coordinate_descent(design, responses, lambda,
                                  Vector<Scalar>::Ones(design.rows()), settings);
}

/// KKT residual evaluated directly on the design (independent of the Gram path).
template <typename DerivedX, typename DerivedY, typename DerivedW, typename DerivedB>
typename DerivedX::Scalar lasso_kkt_residual(const Eigen::MatrixBase<DerivedX>& design,
                                             const Eigen::MatrixBase<DerivedY>& responses,
                                             const Eigen::MatrixBase<DerivedW>& weights,
                                             const Eigen::MatrixBase<DerivedB>& w,
                                             typename DerivedX::Scalar lambda) {
  using Scalar = typename DerivedX::Scalar;
  const Vector<Scalar> weighted_residual = weights.cwiseProduct(responses - design * w);
  const Vector<Scalar> g = design.transpose() * weighted_residual;
  Scalar worst{0};
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    const Scalar violation = w[j] != Scalar(0)
                                 ? std::abs(g[j] - lambda * (w[j] > 0 ? Scalar(1) : Scalar(-1)))
                                 : std::max(std::abs(g[j]) - lambda, Scalar(0));
    worst = std::max(worst, violation);
  }
  return worst;
}

}  // namespace ensel

#endif  // ENSEL_LASSO_HPP
