#include "ensel/recon_limit.hpp"

#include "ensel/special_math.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace ensel;

namespace {

// Independent form of the V equation divided by V, in tau = 1/sqrt(V):
//   F(tau) = 2 (1 - rho) ((1 + tau^2) H(tau) - tau phi(tau)) + rho (1 + tau^2).
double f_of_tau(double tau, double rho) {
  const double h = 0.5 * std::erfc(tau / std::sqrt(2.0));
  const double phi = std::exp(-0.5 * tau * tau) / std::sqrt(2.0 * M_PI);
  return 2.0 * (1.0 - rho) * ((1.0 + tau * tau) * h - tau * phi) + rho * (1.0 + tau * tau);
}

// A finite V exists iff alpha exceeds min over tau of F; scan a fine grid.
double min_f(double rho) {
  double best = std::numeric_limits<double>::infinity();
  for (double tau = 0.0; tau <= 10.0; tau += 1e-4) best = std::min(best, f_of_tau(tau, rho));
  return best;
}

}  // namespace

TEST(SolveV, ResidualVanishesAtTheRoot) {
  for (double rho : {0.05, 0.1, 0.3, 0.6, 0.9}) {
    for (double alpha : {0.5, 0.8, 1.2, 3.0}) {
      if (alpha <= min_f(rho) + 1e-6) continue;
      const double v = solve_v(alpha, rho);
      EXPECT_GT(v, 0.0);
      EXPECT_LE(std::abs(v_equation_residual(v, alpha, rho)), 1e-12 * std::max(1.0, alpha * v));
    }
  }
}

TEST(SolveV, SpecificPointChecksAgainstIndependentForm) {
  const double v = solve_v(0.5, 0.1);
  EXPECT_NEAR(f_of_tau(1.0 / std::sqrt(v), 0.1), 0.5, 1e-10);
}

TEST(SolveV, FullDensityLimit) {
  for (double alpha : {1.5, 2.0, 4.0}) {
    EXPECT_NEAR(solve_v(alpha, 1.0 - 1e-12), 1.0 / (alpha - 1.0), 1e-9);
  }
}

TEST(SolveV, ExistenceMatchesTheMinimumOfF) {
  for (double rho : {0.1, 0.4, 0.8}) {
    const double threshold = min_f(rho);
    EXPECT_NO_THROW(solve_v(threshold * 1.001, rho));
    EXPECT_THROW(solve_v(threshold * 0.999, rho), NoFiniteRootError);
  }
}

TEST(SolveV, GrowsAsAlphaApproachesTheBoundary) {
  const double rho = 0.2;
  const double threshold = min_f(rho);
  double previous = 0.0;
  for (double gap : {1.0, 0.3, 0.1, 0.01}) {
    const double v = solve_v(threshold + gap, rho);
    EXPECT_GT(v, previous);
    previous = v;
  }
}

TEST(SolveV, RejectsInvalidArguments) {
  EXPECT_THROW(solve_v(0.0, 0.3), std::invalid_argument);
  EXPECT_THROW(solve_v(1.0, 1.5), std::invalid_argument);
}

TEST(PerfectRecovery, FarAboveAndBelow) {
  EXPECT_TRUE(perfect_recovery_condition({10.0, 0.3}));
  EXPECT_FALSE(perfect_recovery_condition({0.05, 0.3}));
}

TEST(PerfectRecovery, AgreesWithDirectEvaluation) {
  for (double alpha : {0.6, 0.8, 0.99, 1.3}) {
    const EffectiveDims dims{alpha, 0.5};
    bool expected = false;
    try {
      const double v = solve_v(alpha, 0.5);
      expected = alpha > 2.0 * 0.5 * 0.5 * std::erfc(1.0 / std::sqrt(2.0 * v)) + 0.5;
    } catch (const NoFiniteRootError&) {
      expected = false;
    }
    EXPECT_EQ(perfect_recovery_condition(dims), expected) << alpha;
  }
}

TEST(EffectiveDims, Mapping) {
  const auto dko = effective_dims({ReconAlgorithm::Kind::kDko, 1.0}, 2.0, 0.5);
  EXPECT_DOUBLE_EQ(dko.alpha_eff, 1.0);
  EXPECT_DOUBLE_EQ(dko.rho_eff, 0.25);
  const auto ss1 = effective_dims({ReconAlgorithm::Kind::kSs, 1.0}, 1.0, 0.3);
  EXPECT_NEAR(ss1.alpha_eff, 1.0 - std::exp(-1.0), 1e-15);
  EXPECT_DOUBLE_EQ(ss1.rho_eff, 0.3);
  EXPECT_NEAR(effective_dims({ReconAlgorithm::Kind::kSs, 50.0}, 1.7, 0.3).alpha_eff, 1.7, 1e-15);
}

TEST(PhaseBoundary, OrderingAndBracketing) {
  const double rhos[] = {0.05, 0.1, 0.2, 0.4, 0.6, 0.8};
  const ReconAlgorithm ss1{ReconAlgorithm::Kind::kSs, 1.0};
  const ReconAlgorithm ss2{ReconAlgorithm::Kind::kSs, 2.0};
  const ReconAlgorithm dko{ReconAlgorithm::Kind::kDko, 1.0};
  const auto c1 = phase_boundary_curve(ss1, rhos);
  const auto c2 = phase_boundary_curve(ss2, rhos);
  const auto cd = phase_boundary_curve(dko, rhos);
  for (std::size_t i = 0; i < std::size(rhos); ++i) {
    EXPECT_LT(c2[i].alpha_critical, cd[i].alpha_critical) << rhos[i];
    EXPECT_LT(cd[i].alpha_critical, c1[i].alpha_critical) << rhos[i];
    for (const auto* curve : {&c1, &c2, &cd}) {
      const auto& p = (*curve)[i];
      const double rho = p.rho;
      EXPECT_FALSE(perfect_recovery_condition(effective_dims(p.algorithm, p.alpha_critical * (1 - 1e-4), rho)));
      EXPECT_TRUE(perfect_recovery_condition(effective_dims(p.algorithm, p.alpha_critical * (1 + 1e-4), rho)));
      if (i > 0) EXPECT_GE(p.alpha_critical, (*curve)[i - 1].alpha_critical);
    }
  }
}

TEST(PhaseBoundary, ResamplingRateScaling) {
  const double rhos[] = {0.05, 0.2, 0.5, 0.8};
  const auto c1 = phase_boundary_curve({ReconAlgorithm::Kind::kSs, 1.0}, rhos);
  const auto c3 = phase_boundary_curve({ReconAlgorithm::Kind::kSs, 3.0}, rhos);
  const double factor = -std::expm1(-1.0) / -std::expm1(-3.0);
  for (std::size_t i = 0; i < std::size(rhos); ++i) {
    EXPECT_NEAR(c3[i].alpha_critical / (c1[i].alpha_critical * factor), 1.0, 1e-9);
  }
}

TEST(PhaseBoundary, Labels) {
  EXPECT_EQ((ReconAlgorithm{ReconAlgorithm::Kind::kDko, 1.0}.label()), "dko");
  EXPECT_EQ((ReconAlgorithm{ReconAlgorithm::Kind::kSs, 2.0}.label()), "ss_mu2");
}
