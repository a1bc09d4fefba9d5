#include "ensel/power_curve.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace ensel;

TEST(Grids, LinspaceAndLogspaceEndpoints) {
  const auto lin = linspace(0.0, 1.0, 5);
  ASSERT_EQ(lin.size(), 5u);
  EXPECT_DOUBLE_EQ(lin[1], 0.25);
  EXPECT_EQ(lin.back(), 1.0);
  const auto log = logspace(0.02, 1.0, 8);
  ASSERT_EQ(log.size(), 8u);
  EXPECT_EQ(log.front(), 0.02);
  EXPECT_EQ(log.back(), 1.0);
  for (std::size_t i = 1; i + 1 < log.size(); ++i) {
    EXPECT_NEAR(log[i] * log[i], log[i - 1] * log[i + 1], 1e-14);
  }
}

TEST(Methods, NamesRoundTrip) {
  for (Method m : {Method::kSs, Method::kDko, Method::kKo, Method::kLasso}) {
    EXPECT_EQ(parse_method(to_string(m)), m);
  }
  EXPECT_THROW(parse_method("ridge"), std::invalid_argument);
}

TEST(TprAtFdr, InterpolatesAlongTheSweep) {
  const PowerCurve curve{{0.0, 0.3, 0.9}, {0.5, 0.2, 0.8}, {0.9, 0.0, 0.1}};
  EXPECT_NEAR(tpr_at_fdr(curve, 0.25), 0.85, 1e-14);
  EXPECT_NEAR(tpr_at_fdr(curve, 0.1), 0.45, 1e-14);
  EXPECT_NEAR(tpr_at_fdr(curve, 0.5), 0.9, 1e-14);
  const PowerCurve above{{0.0, 0.6, 1.0}, {0.5, 0.4, 0.7}};
  EXPECT_EQ(tpr_at_fdr(above, 0.1), 0.0);
  EXPECT_EQ(tpr_at_fdr({}, 0.1), 0.0);
}

TEST(SsPowerCurve, StrictThresholdSelectsAlmostNothing) {
  const auto sol = solve_ss({1.12, 0.5, 0.01, 0.05, 1.0});
  const double grid[] = {0.999};
  const auto curve = ss_power_curve(sol, grid);
  ASSERT_EQ(curve.size(), 1u);
  // Only the strongest signals survive: almost no nulls, a minority of signals.
  EXPECT_LT(curve[0].fdr, 1e-2);
  EXPECT_LT(curve[0].tpr, 0.5 * ss_tpr_fdr(sol, 0.5).tpr);
}

TEST(SsPowerCurve, NonincreasingInThreshold) {
  const auto sol = solve_ss({1.12, 0.5, 0.01, 0.05, 2.0});
  const auto curve = ss_power_curve(sol, default_pi_grid());
  for (std::size_t i = 1; i < curve.size(); ++i) {
    EXPECT_LE(curve[i].tpr, curve[i - 1].tpr + 1e-12);
  }
}

TEST(DkoPowerCurve, BothRatesNonincreasingInThreshold) {
  const auto sol = solve_dko({1.12, 0.5, 0.01, 0.0424, 1.0});
  const auto curve = dko_power_curve(sol, default_z_grid(sol), 0.025);
  for (std::size_t i = 1; i < curve.size(); ++i) {
    EXPECT_LE(curve[i].tpr, curve[i - 1].tpr + 1e-12);
    EXPECT_LE(curve[i].fdr, curve[i - 1].fdr + 1e-9) << "z=" << curve[i].threshold;
  }
  EXPECT_NEAR(curve.back().tpr, 0.0, 1e-6);
}

TEST(LassoPowerCurve, LargeLambdaSelectsNothing) {
  const double grid[] = {0.01, 100.0};
  const auto curve = lasso_power_curve({1.12, 0.5, 0.01, 0.1, 1.0}, grid);
  EXPECT_GT(curve[0].tpr, 0.5);
  EXPECT_EQ(curve[1].tpr, 0.0);
  EXPECT_EQ(curve[1].fdr, 0.0);
}

TEST(OptimalLambda, MatchesADenseGridSearch) {
  const ProblemConfig config{1.12, 0.5, 0.01, 0.1, 1.0};
  for (Method method : {Method::kSs, Method::kLasso}) {
    const auto opt = optimal_lambda(method, config);
    double best = std::numeric_limits<double>::infinity();
    for (double lambda : logspace(1e-3, 10.0, 161)) {
      ProblemConfig c = config;
      c.lambda = lambda;
      best = std::min(best, theory_prediction_error(method, c));
    }
    EXPECT_LE(opt.prediction_error, best + 1e-9) << to_string(method);
    EXPECT_GT(opt.lambda, 1e-3);
    EXPECT_LT(opt.lambda, 10.0);
  }
}

TEST(PowerOrdering, ModerateSampleRatio) {
  const ProblemConfig base{1.12, 0.5, 0.01, 0.1, 1.0};
  const auto tpr = [&](Method method, double mu_b) {
    ProblemConfig c = base;
    c.mu_b = mu_b;
    c.lambda = optimal_lambda(method == Method::kKo ? Method::kDko : method, c).lambda;
    return tpr_at_fdr(theory_power_curve(method, c), 0.1);
  };
  const double ss2 = tpr(Method::kSs, 2.0);
  const double dko = tpr(Method::kDko, 1.0);
  const double ss1 = tpr(Method::kSs, 1.0);
  const double ko = tpr(Method::kKo, 1.0);
  const double lasso = tpr(Method::kLasso, 1.0);
  EXPECT_GE(ss2, dko);
  EXPECT_GE(dko, ss1);
  EXPECT_GE(dko, ko);
  EXPECT_GE(std::min(ss1, ko), lasso);
}
