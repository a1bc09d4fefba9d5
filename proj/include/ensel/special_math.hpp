#ifndef ENSEL_SPECIAL_MATH_HPP
#define ENSEL_SPECIAL_MATH_HPP

// Scalar building blocks shared by the asymptotic theories: Gaussian tails,
// Gauss-Hermite expectations, truncated Poisson sums and the Gaussian
// moments of the scalar soft-threshold estimator.

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

namespace ensel {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Upper tail of the standard normal, H(x) = P(Z > x).
template <std::floating_point Scalar>
Scalar gauss_upper_tail(Scalar x) {
  return Scalar(0.5) * std::erfc(x / std::numbers::sqrt2_v<Scalar>);
}

template <std::floating_point Scalar>
Scalar gauss_density(Scalar x) {
  return std::exp(Scalar(-0.5) * x * x) * std::numbers::inv_sqrtpi_v<Scalar> /
         std::numbers::sqrt2_v<Scalar>;
}

/// sign(h) max(|h| - lambda, 0), the proximal map of lambda |.|.
template <std::floating_point Scalar>
Scalar soft_threshold(Scalar h, Scalar lambda) {
  if (h > lambda) return h - lambda;
  if (h < -lambda) return h + lambda;
  return Scalar(0);
}

/// Minimizer of (q_hat/2) w^2 - h w + lambda |w|.
template <std::floating_point Scalar>
Scalar soft_threshold_argmin(Scalar h, Scalar lambda, Scalar q_hat) {
  if (!(q_hat > Scalar(0))) {
    throw std::domain_error("soft_threshold_argmin: q_hat must be positive");
  }
  return soft_threshold(h, lambda) / q_hat;
}

template <std::floating_point Scalar>
struct SoftThresholdMoments {
  Scalar mean{0};
  Scalar second_moment{0};
  Scalar nonzero_prob{0};
  /// d mean / d a; equals nonzero_prob / q_hat by Stein's identity.
  Scalar mean_derivative{0};
};

/// Moments of w = soft_threshold_argmin(a + sqrt(v_hat) eta, lambda, q_hat)
/// over eta ~ N(0, 1), in closed form.
template <std::floating_point Scalar>
SoftThresholdMoments<Scalar> soft_threshold_gaussian_moments(Scalar a, Scalar v_hat,
                                                             Scalar lambda, Scalar q_hat) {
  if (!(q_hat > Scalar(0))) {
    throw std::domain_error("soft_threshold_gaussian_moments: q_hat must be positive");
  }
  SoftThresholdMoments<Scalar> out;
  if (v_hat <= Scalar(0)) {
    const Scalar w = soft_threshold(a, lambda) / q_hat;
    out.mean = w;
    out.second_moment = w * w;
    out.nonzero_prob = std::abs(a) > lambda ? Scalar(1) : Scalar(0);
    out.mean_derivative = out.nonzero_prob / q_hat;
    return out;
  }
  const Scalar s = std::sqrt(v_hat);
  const Scalar c = a - lambda;  // shift of the upper branch
  const Scalar b = a + lambda;  // shift of the lower branch
  const Scalar p_up = gauss_upper_tail(-c / s);
  const Scalar p_down = gauss_upper_tail(b / s);
  const Scalar d_up = gauss_density(c / s);
  const Scalar d_down = gauss_density(b / s);

  const Scalar first = c * p_up + s * d_up + b * p_down - s * d_down;
  const Scalar second =
      (c * c + v_hat) * p_up + c * s * d_up + (b * b + v_hat) * p_down - b * s * d_down;

  out.mean = first / q_hat;
  out.second_moment = std::max(second / (q_hat * q_hat), out.mean * out.mean);
  out.nonzero_prob = std::clamp(p_up + p_down, Scalar(0), Scalar(1));
  out.mean_derivative = out.nonzero_prob / q_hat;
  return out;
}

/// Probabilist's Gauss-Hermite rule: E[f(xi)], xi ~ N(0, 1), ~ sum_i w_i f(x_i).
template <std::floating_point Scalar>
struct QuadratureRule {
  Vector<Scalar> nodes;
  Vector<Scalar> weights;

  Eigen::Index size() const { return nodes.size(); }
};

/// Golub-Welsch on the Jacobi matrix of the monic probabilist's Hermite
/// polynomials (off-diagonal sqrt(k)).
template <std::floating_point Scalar>
QuadratureRule<Scalar> gauss_hermite_rule(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite_rule: need at least one node");
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Matrix jacobi = Matrix::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(static_cast<Scalar>(k));
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(jacobi);
  QuadratureRule<Scalar> rule;
  rule.nodes = eig.eigenvalues();
  rule.weights = eig.eigenvectors().row(0).transpose().array().square();
  rule.weights /= rule.weights.sum();
  // Symmetrize: the exact rule is even, which keeps odd moments at zero.
  for (int i = 0, j = n - 1; i < j; ++i, --j) {
    const Scalar x = Scalar(0.5) * (rule.nodes[j] - rule.nodes[i]);
    const Scalar w = Scalar(0.5) * (rule.weights[i] + rule.weights[j]);
    rule.nodes[i] = -x;
    rule.nodes[j] = x;
    rule.weights[i] = rule.weights[j] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = Scalar(0);
  return rule;
}

template <std::floating_point Scalar, typename F>
Scalar gauss_hermite_expect(F&& f, const QuadratureRule<Scalar>& rule) {
  Scalar acc{0};
  for (Eigen::Index i = 0; i < rule.size(); ++i) acc += rule.weights[i] * f(rule.nodes[i]);
  return acc;
}

/// E[g(c)], c ~ Poisson(mu_b), truncated at the first C whose cumulative
/// mass reaches 1 - mass_tol.
template <std::floating_point Scalar, typename G>
Scalar poisson_truncated_expect(Scalar mu_b, G&& g, Scalar mass_tol = Scalar(1e-12)) {
  if (!(mu_b > Scalar(0))) throw std::domain_error("poisson_truncated_expect: mu_b must be positive");
  if (!(mass_tol > Scalar(0))) throw std::domain_error("poisson_truncated_expect: mass_tol must be positive");
  const Scalar log_mu = std::log(mu_b);
  const long hard_cap = static_cast<long>(mu_b + 60 * std::sqrt(mu_b) + 200);
  Scalar acc{0};
  Scalar cumulative{0};
  for (long c = 0; c <= hard_cap; ++c) {
    const Scalar cs = static_cast<Scalar>(c);
    const Scalar pmf = std::exp(-mu_b + cs * log_mu - std::lgamma(cs + 1));
    acc += pmf * g(c);
    cumulative += pmf;
    if (cumulative >= Scalar(1) - mass_tol) break;
  }
  return acc;
}

namespace detail {

template <std::floating_point Scalar, typename F>
std::pair<Scalar, Scalar> kronrod15(F& f, Scalar lo, Scalar hi) {
  static constexpr double xgk[8] = {
      0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
      0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
      0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
      0.207784955007898467600689403773245, 0.0};
  static constexpr double wgk[8] = {
      0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
      0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
      0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
      0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  static constexpr double wg[4] = {
      0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
      0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
  const Scalar center = Scalar(0.5) * (lo + hi);
  const Scalar half = Scalar(0.5) * (hi - lo);
  const Scalar fc = f(center);
  Scalar kronrod = fc * Scalar(wgk[7]);
  Scalar gauss = fc * Scalar(wg[3]);
  for (int k = 0; k < 7; ++k) {
    const Scalar dx = half * Scalar(xgk[k]);
    const Scalar sum = f(center - dx) + f(center + dx);
    kronrod += Scalar(wgk[k]) * sum;
    if (k % 2 == 1) gauss += Scalar(wg[k / 2]) * sum;
  }
  return {kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) on a finite interval: bisects the
/// panel with the largest error estimate until the summed estimate drops
/// below abs_tol or max_panels panels exist.
template <std::floating_point Scalar, typename F>
Scalar integrate_adaptive(F&& f, Scalar lo, Scalar hi, Scalar abs_tol = Scalar(1e-13),
                          int max_panels = 2000) {
  if (!(hi > lo)) return Scalar(0);
  struct Panel {
    Scalar lo, hi, value, error;
    bool operator<(const Panel& other) const { return error < other.error; }
  };
  std::vector<Panel> heap;
  const auto [v0, e0] = detail::kronrod15(f, lo, hi);
  heap.push_back({lo, hi, v0, e0});
  Scalar error = e0;
  while (error > abs_tol && static_cast<int>(heap.size()) < max_panels) {
    std::pop_heap(heap.begin(), heap.end());
    const Panel worst = heap.back();
    const Scalar mid = Scalar(0.5) * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi)) break;
    heap.pop_back();
    const auto [vl, el] = detail::kronrod15(f, worst.lo, mid);
    const auto [vr, er] = detail::kronrod15(f, mid, worst.hi);
    error += el + er - worst.error;
    heap.push_back({worst.lo, mid, vl, el});
    std::push_heap(heap.begin(), heap.end());
    heap.push_back({mid, worst.hi, vr, er});
    std::push_heap(heap.begin(), heap.end());
  }
  Scalar total{0};
  for (const auto& p : heap) total += p.value;
  return total;
}

/// Bisection for an increasing predicate boundary: returns x in [lo, hi]
/// with pred(lo) false and pred(hi) true, to the given width.
template <std::floating_point Scalar, typename Pred>
Scalar bisect_boundary(Pred&& pred, Scalar lo, Scalar hi, Scalar width) {
  for (int it = 0; it < 400 && hi - lo > width; ++it) {
    const Scalar mid = Scalar(0.5) * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (pred(mid) ? hi : lo) = mid;
  }
  return Scalar(0.5) * (lo + hi);
}

}  // namespace ensel

#endif  // ENSEL_SPECIAL_MATH_HPP
