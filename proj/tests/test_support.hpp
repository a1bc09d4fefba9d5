#ifndef ENSEL_TEST_SUPPORT_HPP
#define ENSEL_TEST_SUPPORT_HPP

// Independent numerical oracles shared by the unit and acceptance tests.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace ensel::testing {

struct LegendreRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;  // sum to 2
};

/// Gauss-Legendre via Golub-Welsch.
inline LegendreRule gauss_legendre(int n) {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = jacobi(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  LegendreRule rule;
  for (int i = 0; i < n; ++i) {
    rule.nodes.push_back(eig.eigenvalues()[i]);
    const double v = eig.eigenvectors()(0, i);
    rule.weights.push_back(2.0 * v * v);
  }
  return rule;
}

/// E[f(eta)], eta ~ N(0, 1), with `total_nodes` Gauss-Legendre nodes spread
/// over [-12, 12] split at the given breakpoints (kinks or jumps of f).
template <typename F>
double piecewise_gauss_expect(F&& f, std::vector<double> breaks, int total_nodes = 200) {
  constexpr double kReach = 12.0;
  breaks.push_back(-kReach);
  breaks.push_back(kReach);
  std::erase_if(breaks, [](double x) { return !(std::abs(x) <= kReach); });
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  const int pieces = static_cast<int>(breaks.size()) - 1;
  const LegendreRule rule = gauss_legendre(total_nodes / pieces);
  double acc = 0.0;
  for (int p = 0; p < pieces; ++p) {
    const double lo = breaks[p];
    const double hi = breaks[p + 1];
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double x = mid + half * rule.nodes[i];
      acc += half * rule.weights[i] * std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI) * f(x);
    }
  }
  return acc;
}

/// Mean and standard error of a sample accumulated on the fly.
struct RunningMean {
  double sum = 0.0;
  double sum_sq = 0.0;
  long count = 0;

  void add(double x) {
    sum += x;
    sum_sq += x * x;
    ++count;
  }
  double mean() const { return sum / count; }
  double std_error() const {
    const double m = mean();
    return std::sqrt(std::max(sum_sq / count - m * m, 0.0) / (count - 1));
  }
};

}  // namespace ensel::testing

#endif  // ENSEL_TEST_SUPPORT_HPP
