#include "ensel/power_curve.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ensel {

Method parse_method(const std::string& name) {
  if (name == "ss") return Method::kSs;
  if (name == "dko") return Method::kDko;
  if (name == "ko") return Method::kKo;
  if (name == "lasso") return Method::kLasso;
  throw std::invalid_argument("unknown method '" + name + "' (expected ss, dko, ko or lasso)");
}

std::string to_string(Method method) {
  switch (method) {
    case Method::kSs: return "ss";
    case Method::kDko: return "dko";
    case Method::kKo: return "ko";
    case Method::kLasso: return "lasso";
  }
  return "?";
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(static_cast<std::size_t>(std::max(n, 1)), lo);
  for (int i = 1; i < n; ++i) out[i] = lo + (hi - lo) * i / (n - 1);
  return out;
}

std::vector<double> logspace(double lo, double hi, int n) {
  auto out = linspace(std::log(lo), std::log(hi), n);
  for (double& x : out) x = std::exp(x);
  if (!out.empty()) {
    out.front() = lo;
    if (n > 1) out.back() = hi;
  }
  return out;
}

std::vector<double> default_pi_grid() {
  auto grid = linspace(0.0, 0.995, 400);
  for (double tail : {1e-3, 3e-4, 1e-4, 3e-5, 1e-5, 1e-6}) grid.push_back(1.0 - tail);
  return grid;
}

std::vector<double> default_z_grid(const DkoSolution& sol) {
  const double scale = (6.0 * sol.hats.field().signal_sd() + 1e-12) / sol.hats.q_hat;
  return linspace(0.0, scale, 400);
}

std::vector<double> default_lambda_grid() { return logspace(1e-3, 20.0, 300); }

PowerCurve ss_power_curve(const SsSolution& sol, std::span<const double> pi_grid) {
  PowerCurve curve;
  curve.reserve(pi_grid.size());
  for (const double pi : pi_grid) {
    const Rates r = ss_tpr_fdr(sol, pi);
    curve.push_back({pi, r.fdr, r.tpr});
  }
  return curve;
}

PowerCurve dko_power_curve(const DkoSolution& sol, std::span<const double> z_grid, double pi_th) {
  PowerCurve curve;
  curve.reserve(z_grid.size());
  for (const double z : z_grid) {
    const Rates r = dko_tpr_fdr(sol, {z, pi_th});
    curve.push_back({z, r.fdr, r.tpr});
  }
  return curve;
}

PowerCurve ko_power_curve(const DkoSolution& sol, std::span<const double> z_grid) {
  PowerCurve curve;
  curve.reserve(z_grid.size());
  for (const double z : z_grid) {
    const Rates r = vanilla_ko_tpr_fdr(sol, z);
    curve.push_back({z, r.fdr, r.tpr});
  }
  return curve;
}

PowerCurve lasso_power_curve(const ProblemConfig& config, std::span<const double> lambda_grid,
                             const SolverSettings& settings) {
  PowerCurve curve;
  curve.reserve(lambda_grid.size());
  for (const double lambda : lambda_grid) {
    ProblemConfig c = config;
    c.lambda = lambda;
    const SsSolution sol = vanilla_lasso_solution(c, settings);
    // The lasso selects exactly its nonzero coordinates: Pi in {0, 1}.
    const Rates r = ss_tpr_fdr(sol, 0.5);
    curve.push_back({lambda, r.fdr, r.tpr});
  }
  return curve;
}

double tpr_at_fdr(const PowerCurve& curve, double target_fdr) {
  if (curve.empty()) return 0.0;
  double best = -1.0;
  bool any_below = false;
  double best_below = 0.0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const auto& p = curve[i];
    if (p.fdr <= target_fdr) {
      any_below = true;
      best_below = std::max(best_below, p.tpr);
    }
    if (i == 0) continue;
    const auto& prev = curve[i - 1];
    const double lo = std::min(prev.fdr, p.fdr);
    const double hi = std::max(prev.fdr, p.fdr);
    if (target_fdr < lo || target_fdr > hi) continue;
    const double t = hi > lo ? (target_fdr - prev.fdr) / (p.fdr - prev.fdr) : 1.0;
    best = std::max(best, prev.tpr + t * (p.tpr - prev.tpr));
  }
  if (best >= 0.0) return best;
  return any_below ? best_below : 0.0;
}

double theory_prediction_error(Method method, const ProblemConfig& config,
                               const SolverSettings& settings) {
  switch (method) {
    case Method::kSs: return ss_prediction_error(solve_ss(config, settings));
    case Method::kDko:
    case Method::kKo: return dko_prediction_error(solve_dko(config, settings));
    case Method::kLasso: return ss_prediction_error(vanilla_lasso_solution(config, settings));
  }
  throw std::logic_error("unreachable");
}

LambdaOptimum optimal_lambda(Method method, const ProblemConfig& config,
                             const SolverSettings& settings, double lo, double hi,
                             double log_tol) {
  const auto objective = [&](double log_lambda) {
    ProblemConfig c = config;
    c.lambda = std::exp(log_lambda);
    return theory_prediction_error(method, c, settings);
  };
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = std::log(lo);
  double b = std::log(hi);
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = objective(x1);
  double f2 = objective(x2);
  while (b - a > log_tol) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = objective(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = objective(x2);
    }
  }
  const double best = 0.5 * (a + b);
  return {std::exp(best), objective(best)};
}

PowerCurve theory_power_curve(Method method, const ProblemConfig& config,
                              const SolverSettings& settings, double dko_pi_th) {
  switch (method) {
    case Method::kSs: return ss_power_curve(solve_ss(config, settings), default_pi_grid());
    case Method::kDko: {
      const DkoSolution sol = solve_dko(config, settings);
      return dko_power_curve(sol, default_z_grid(sol), dko_pi_th);
    }
    case Method::kKo: {
      const DkoSolution sol = solve_dko(config, settings);
      return ko_power_curve(sol, default_z_grid(sol));
    }
    case Method::kLasso: return lasso_power_curve(config, default_lambda_grid(), settings);
  }
  throw std::logic_error("unreachable");
}

}  // namespace ensel
