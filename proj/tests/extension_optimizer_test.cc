//
// Copyright 2026 The Debias Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "debias/extension_optimizer.h"

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "debias/monte_carlo.h"
#include "debias/noise.h"
#include "debias/quadrature.h"
#include "oracles.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace debias {
namespace {

using oracles::ProjectedGradientOracle;
using oracles::RandomExtensionProblems;

constexpr double kInf = std::numeric_limits<double>::infinity();

ExtensionProblem MakeProblem(const char* f, double lower, int k, double b,
                             const char* prior) {
  auto fn = SmoothFunction::Parse(f);
  EXPECT_TRUE(fn.ok()) << f;
  auto mu = PriorMeasure::Parse(prior);
  EXPECT_TRUE(mu.ok()) << prior << ": " << mu.status();
  auto p = ExtensionProblem::Create(*fn, lower, k, b, *mu);
  EXPECT_TRUE(p.ok()) << p.status();
  return *p;
}

ExtensionSolution MakeSolution(const char* f, double lower, int k, double b,
                               const char* prior) {
  auto sol = Solve(MakeProblem(f, lower, k, b, prior));
  EXPECT_TRUE(sol.ok()) << sol.status();
  return *sol;
}

TEST(TailMomentTest, Examples) {
  EXPECT_EQ(TailMoment(0, 3.7, 2.0), 2.0);
  EXPECT_NEAR(TailMoment(1, 0.0, 1.0), -1.0, 1e-15);
  for (int m : {1, 2, 4, 7}) {
    for (double lower : {-1.0, 0.0, 1.0, 3.0}) {
      const double b = 0.5;
      const auto oracle = AdaptiveIntegrate(
          [&](double s) {
            // x = L - s
            return std::pow(lower - s, m) * std::exp(-s / b);
          },
          0.0, kInf, 1e-14);
      EXPECT_NEAR(TailMoment(m, lower, b), oracle.value,
                  1e-10 * std::max(1.0, std::abs(oracle.value)))
          << m << " " << lower;
    }
  }
}

TEST(PriorMeasureTest, ParseAndNormalize) {
  auto d = PriorMeasure::Parse("discrete:2@1,4@3");
  ASSERT_TRUE(d.ok());
  EXPECT_DOUBLE_EQ(d->atoms()[0].weight, 0.25);
  EXPECT_DOUBLE_EQ(d->atoms()[1].weight, 0.75);
  EXPECT_EQ(d->SupportMin(), 2.0);
  auto u = PriorMeasure::Parse("uniform:1:50");
  ASSERT_TRUE(u.ok());
  EXPECT_TRUE(u->is_uniform());
  EXPECT_EQ(PriorMeasure::Parse(u->Spec())->Spec(), u->Spec());
  EXPECT_FALSE(PriorMeasure::Parse("uniform:5:1").ok());
  EXPECT_FALSE(PriorMeasure::Parse("discrete:2@-1").ok());
  EXPECT_FALSE(PriorMeasure::Parse("gauss:1").ok());
}

TEST(ExtensionProblemTest, Validation) {
  const auto inv = SmoothFunction::Inverse();
  EXPECT_FALSE(
      ExtensionProblem::Create(inv, 1.0, 10, 2.0, *PriorMeasure::PointMass(0.5))
          .ok());
  EXPECT_FALSE(ExtensionProblem::Create(inv, 1.0, 1, 2.0,
                                        *PriorMeasure::PointMass(2.0))
                   .ok());
  EXPECT_FALSE(ExtensionProblem::Create(inv, 1.0, kMaxExtensionDegree + 1, 2.0,
                                        *PriorMeasure::PointMass(2.0))
                   .ok());
  EXPECT_FALSE(ExtensionProblem::Create(inv, 1.0, 5, 0.0,
                                        *PriorMeasure::PointMass(2.0))
                   .ok());
  EXPECT_FALSE(ExtensionProblem::Create(inv, 0.0, 5, 1.0,
                                        *PriorMeasure::PointMass(2.0))
                   .ok());
  EXPECT_FALSE(ExtensionProblem::Create(SmoothFunction::Abs(), -1.0, 5, 1.0,
                                        *PriorMeasure::PointMass(2.0))
                   .ok());
}

TEST(ReducedQpTest, ScalarHessianMatchesFiniteDifferences) {
  auto qp = BuildReducedQp(MakeProblem("inverse", 1.0, 3, 1.0, "point:2"));
  ASSERT_TRUE(qp.ok());
  ASSERT_EQ(qp->num_free(), 1);
  EXPECT_GT(qp->q(0, 0), 0.0);
  const double h = 1e-3;
  Eigen::VectorXd z(1);
  auto j = [&](double v) {
    z(0) = v;
    return qp->Objective(z);
  };
  const double fd = (j(h) - 2 * j(0) + j(-h)) / (h * h);
  EXPECT_NEAR(qp->q(0, 0), fd, 1e-6 * qp->q(0, 0));
}

TEST(ReducedQpTest, TaylorPointIsExampleExtension) {
  // h(q) = 1 - (q - 1) + (q - 1)^2 = 3 - 3q + q^2.
  for (int k : {2, 3, 6}) {
    auto qp = BuildReducedQp(MakeProblem("inverse", 1.0, k, 2.0, "point:3"));
    ASSERT_TRUE(qp.ok());
    const Eigen::VectorXd y = qp->FullCoefficients(Eigen::VectorXd::Zero(k - 2));
    // y is the Laguerre form of g; recover via the solution for k = 2 only.
    EXPECT_EQ(y.size(), k + 1);
    for (int i = 3; i <= k; ++i) EXPECT_EQ(y(i), 0.0);
  }
  const ExtensionSolution sol = MakeSolution("inverse", 1.0, 2, 2.0, "point:7");
  ASSERT_GE(sol.h().coeffs().size(), 3u);
  EXPECT_NEAR(sol.h().coeffs()[0], 3.0, 1e-12);
  EXPECT_NEAR(sol.h().coeffs()[1], -3.0, 1e-12);
  EXPECT_NEAR(sol.h().coeffs()[2], 1.0, 1e-12);
  EXPECT_EQ(sol.objective(), sol.taylor_objective());
}

TEST(ReducedQpTest, PsdOnRandomProblems) {
  for (const ExtensionProblem& p : RandomExtensionProblems(50, 1)) {
    auto qp = BuildReducedQp(p);
    ASSERT_TRUE(qp.ok());
    if (qp->num_free() == 0) continue;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(qp->q);
    const Eigen::VectorXd d = ldlt.vectorD();
    EXPECT_GE(d.minCoeff(), -1e-10 * d.cwiseAbs().maxCoeff());
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(qp->q);
    EXPECT_GE(eig.eigenvalues().minCoeff(),
              -1e-10 * eig.eigenvalues().maxCoeff());
  }
}

TEST(ReducedQpTest, GradientMatchesCentralDifferences) {
  std::mt19937_64 gen(2);
  std::normal_distribution<double> normal;
  for (const ExtensionProblem& p : RandomExtensionProblems(20, 3)) {
    auto qp = BuildReducedQp(p);
    ASSERT_TRUE(qp.ok());
    const int n = qp->num_free();
    for (int trial = 0; trial < 10 && n > 0; ++trial) {
      Eigen::VectorXd z(n);
      for (int i = 0; i < n; ++i) z(i) = normal(gen);
      const Eigen::VectorXd grad = qp->Gradient(z);
      for (int i = 0; i < n; ++i) {
        const double h = 1e-4 * std::max(1.0, std::abs(z(i)));
        Eigen::VectorXd zp = z, zm = z;
        zp(i) += h;
        zm(i) -= h;
        const double fd = (qp->Objective(zp) - qp->Objective(zm)) / (2 * h);
        EXPECT_NEAR(grad(i), fd, 1e-6 * std::max(grad.norm(), 1e-12))
            << "coordinate " << i;
      }
    }
  }
}

TEST(SolveTest, ConstraintsAndDominanceOnRandomProblems) {
  for (const ExtensionProblem& p : RandomExtensionProblems(50, 4)) {
    auto sol = Solve(p);
    ASSERT_TRUE(sol.ok()) << sol.status();
    const auto r = ConstraintResiduals(*sol);
    const double L = p.lower_bound;
    EXPECT_LE(std::abs(r[0]), 1e-9 * std::max(1.0, std::abs(p.f.Value(L))));
    EXPECT_LE(std::abs(r[1]),
              1e-9 * std::max(1.0, std::abs(p.f.FirstDerivative(L))));
    EXPECT_LE(std::abs(r[2]),
              1e-9 * std::max(1.0, std::abs(p.f.SecondDerivative(L))));
    EXPECT_LE(sol->objective(),
              sol->taylor_objective() * (1 + 1e-12) + 1e-300);
    EXPECT_LE(sol->grad_norm(), 1e-8 * (1 + std::abs(sol->objective())));
  }
}

TEST(SolveTest, GEqualsHMinusBSquaredHSecond) {
  const ExtensionSolution sol =
      MakeSolution("inverse", 1.0, 10, 2.0, "uniform:1:50");
  const auto& a = sol.g().coeffs();
  const auto& h = sol.h().coeffs();
  const double b = 2.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double next = i + 2 < h.size() ? h[i + 2] : 0.0;
    const double expected = h[i] - b * b * (i + 2.0) * (i + 1.0) * next;
    EXPECT_NEAR(a[i], expected, 1e-12 * std::max(1.0, std::abs(expected)));
  }
}

TEST(SolveTest, OptimumBeatsTaylorForInverse) {
  const ExtensionSolution sol =
      MakeSolution("inverse", 1.0, 10, 2.0, "uniform:1:50");
  EXPECT_LT(sol.objective(), sol.taylor_objective());
}

TEST(SolveTest, ZeroPastingDataGivesZeroEstimator) {
  // power:3 vanishes to second order at 0, so the smallest feasible
  // Laguerre vector is zero; the piecewise estimator stays unbiased.
  const ExtensionSolution sol = MakeSolution("power:3", 0.0, 5, 1.0, "point:1");
  for (double x : {-5.0, -2.0, -0.5}) EXPECT_EQ(sol.EvaluateLeft(x), 0.0);
  for (double q : {0.0, 0.5, 3.0}) {
    EXPECT_NEAR(*EstimatorExpectation(sol, q), q * q * q, 1e-8);
  }
}

TEST(SolveTest, MinimizerDoesNotDependOnPrior) {
  const ExtensionSolution base = MakeSolution("inverse", 1.0, 10, 2.0, "point:1");
  for (const char* prior : {"point:2", "point:13", "uniform:1:200",
                            "discrete:1@1,5@2,40@1"}) {
    const ExtensionSolution other =
        MakeSolution("inverse", 1.0, 10, 2.0, prior);
    for (double x = -20.0; x < 1.0; x += 0.5) {
      EXPECT_NEAR(other.EvaluateLeft(x), base.EvaluateLeft(x),
                  1e-8 * std::max(1.0, std::abs(base.EvaluateLeft(x))))
          << prior;
    }
  }
}

TEST(SolveTest, UnderflowingPriorWeightFallsBack) {
  const ExtensionSolution far = MakeSolution("inverse", 1.0, 6, 0.5, "point:1000");
  EXPECT_TRUE(far.used_fallback());
  const ExtensionSolution near = MakeSolution("inverse", 1.0, 6, 0.5, "point:2");
  EXPECT_FALSE(near.used_fallback());
  for (double x = -5.0; x < 1.0; x += 0.5) {
    EXPECT_NEAR(far.EvaluateLeft(x), near.EvaluateLeft(x),
                1e-9 * std::max(1.0, std::abs(near.EvaluateLeft(x))));
  }
}

TEST(SolveTest, LaguerreAndMonomialObjectivesAgree) {
  for (int k : {2, 3, 5, 8}) {
    const ExtensionProblem p = MakeProblem("inverse", 1.0, k, 1.5, "uniform:1:9");
    auto sol = Solve(p);
    ASSERT_TRUE(sol.ok());
    auto monomial = EvaluateObjective(p, sol->g());
    ASSERT_TRUE(monomial.ok());
    EXPECT_NEAR(*monomial, sol->objective(), 1e-8 * sol->objective()) << k;
  }
}

TEST(SolveTest, EvaluationRoutesAgree) {
  const ExtensionSolution sol = MakeSolution("inverse", 1.0, 8, 1.0, "point:2");
  for (double x = -3.0; x < 1.0; x += 0.25) {
    EXPECT_NEAR(sol.EvaluateLeft(x), sol.g().Evaluate(x),
                1e-9 * std::max(1.0, std::abs(sol.EvaluateLeft(x))));
    const double t = (1.0 - x) / 1.0;
    EXPECT_NEAR(sol.g_scaled().Evaluate(t), sol.g().Evaluate(x),
                1e-9 * std::max(1.0, std::abs(sol.g().Evaluate(x))));
  }
  EXPECT_EQ(sol.Estimate(2.0), 0.5 - 2.0 / 8.0);
}

// Raw coefficient maps between g and h.
TEST(CoefficientMapTest, UnscaledRecursionNeedsPowersOfB) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (int k = 0; k <= 12; ++k) {
    for (double b : {0.5, 1.0, 2.0}) {
      std::vector<double> a(k + 1);
      for (double& v : a) v = coef(gen);
      const Polynomial g(a);
      const Polynomial h = ExtensionFromEstimator(g, b);
      // h_i = sum_l (i+2l)!/i! b^{2l} a_{i+2l}
      for (int i = 0; i <= k; ++i) {
        double with_b = 0.0, unscaled = 0.0, falling = 1.0, b2l = 1.0;
        for (int l = 0; i + 2 * l <= k; ++l) {
          if (l > 0) {
            falling *= (i + 2.0 * l) * (i + 2.0 * l - 1);
            b2l *= b * b;
          }
          with_b += falling * b2l * a[i + 2 * l];
          unscaled += falling * a[i + 2 * l];
        }
        EXPECT_NEAR(h.coeffs()[i], with_b, 1e-9 * std::max(1.0, std::abs(with_b)));
        if (b == 1.0) {
          EXPECT_NEAR(unscaled, with_b, 1e-9 * std::max(1.0, std::abs(with_b)));
        }
      }
      // The back map subtracts terms of size ~(2l)! b^{2l}, so the
      // round-trip error is judged against the magnitudes involved.
      const Polynomial back = EstimatorFromExtension(h, b);
      const auto& hc = h.coeffs();
      for (int i = 0; i <= k; ++i) {
        const double next =
            i + 2 <= k ? b * b * (i + 2.0) * (i + 1.0) * std::abs(hc[i + 2]) : 0;
        EXPECT_NEAR(back.coeffs()[i], a[i], 1e-14 * (std::abs(hc[i]) + next));
      }
    }
  }
}

TEST(EstimatorMomentsTest, Examples) {
  const ExtensionSolution taylor = MakeSolution("inverse", 1.0, 2, 2.0, "point:2");
  EXPECT_NEAR(*EstimatorExpectation(taylor, 2.0), 0.5, 1e-6);
  const ExtensionSolution k10 = MakeSolution("inverse", 1.0, 10, 2.0, "point:1");
  EXPECT_NEAR(*EstimatorExpectation(k10, 1.0), 1.0, 1e-6);
  EXPECT_NEAR(*EstimatorExpectation(k10, 20.0), 0.05, 1e-6);
  EXPECT_FALSE(EstimatorExpectation(k10, 0.5).ok());
  EXPECT_FALSE(EstimatorVariance(k10, 0.5).ok());
}

TEST(EstimatorMomentsTest, UnbiasedOnGrid) {
  const std::vector<ExtensionSolution> sols = {
      MakeSolution("inverse", 1.0, 2, 2.0, "point:1"),
      MakeSolution("inverse", 1.0, 10, 2.0, "uniform:1:50"),
      MakeSolution("inverse", 2.0, 6, 0.5, "point:3"),
      MakeSolution("kth_root:2", 1.0, 5, 1.0, "uniform:1:20"),
      MakeSolution("cos:1", 0.0, 7, 0.5, "discrete:0.5@1,2@1"),
  };
  for (const ExtensionSolution& sol : sols) {
    const double L = sol.problem().lower_bound;
    for (int i = 0; i < 20; ++i) {
      const double q = L + 100.0 * i / 19.0;
      auto e = EstimatorExpectation(sol, q);
      ASSERT_TRUE(e.ok()) << e.status();
      EXPECT_NEAR(*e, sol.problem().f.Value(q), 1e-6)
          << sol.problem().f.Spec() << " q=" << q;
    }
  }
}

// Direct quadrature of (estimator - c)^r against the Laplace density, using
// the raw polynomial on the left rather than Laguerre orthonormality.
double CentralMomentByQuadrature(const ExtensionSolution& sol, double q,
                                 double center, int r, double cutoff = kInf) {
  const double L = sol.problem().lower_bound;
  const double b = sol.problem().noise_scale;
  // x = q + b s on each side of q, so the weight is e^{-|s|} / 2; the
  // piece below L starts at s = (q - L) / b.
  auto term = [&](double x) { return std::pow(sol.Estimate(x) - center, r); };
  const double kink = (q - L) / b;
  const double s_max = std::isinf(cutoff) ? kInf : cutoff / b;
  const double up = AdaptiveIntegrate(
      [&](double s) { return 0.5 * term(q + b * s) * std::exp(-s); }, 0.0,
      kInf, 1e-11).value;
  const double mid = AdaptiveIntegrate(
      [&](double s) { return 0.5 * term(q - b * s) * std::exp(-s); }, 0.0,
      kink, 1e-11).value;
  const double low = s_max > kink ? AdaptiveIntegrate(
      [&](double s) { return 0.5 * term(q - b * s) * std::exp(-s); }, kink,
      s_max, 1e-11).value : 0.0;
  return up + mid + low;
}

TEST(EstimatorMomentsTest, VarianceMatchesDirectQuadrature) {
  for (const char* prior : {"point:1", "uniform:1:50"}) {
    const ExtensionSolution sol = MakeSolution("inverse", 1.0, 10, 2.0, prior);
    for (double q : {1.0, 2.0, 13.0, 200.0}) {
      auto var = EstimatorVariance(sol, q);
      ASSERT_TRUE(var.ok());
      EXPECT_GE(*var, 0.0);
      const double direct = CentralMomentByQuadrature(sol, q, 1.0 / q, 2);
      EXPECT_NEAR(*var, direct, 1e-8 * direct) << q;
    }
  }
}

// The left tail of g(q + Z) is extremely heavy (E[(g - 1/q)^4] ~ 6e15 at
// q = 2), so the plug-in standard error of a sample variance is meaningless
// there. The MC check at q = 2 therefore compares the second moment truncated
// to x >= q - 10b, where the plug-in SE is reliable, against the same
// truncated integral; q = 200 uses the plain 20% comparison.
TEST(EstimatorMomentsTest, VarianceMatchesMonteCarlo) {
  const double b = 2.0;
  const ExtensionSolution sol = MakeSolution("inverse", 1.0, 10, b, "point:1");
  {
    const double q = 2.0, cutoff = 10.0 * b;
    const RunningStats mc = ParallelMonteCarlo(
        10'000'000, 31, 1, [&](RngStream& rng) {
          const double z = SampleLaplace(b, rng);
          if (z < -cutoff) return 0.0;
          const double d = sol.Estimate(q + z) - 1.0 / q;
          return d * d;
        });
    const double truncated =
        CentralMomentByQuadrature(sol, q, 1.0 / q, 2, cutoff);
    EXPECT_NEAR(mc.mean(), truncated, 4.0 * mc.StdErrorOfMean());
  }
  {
    const double q = 200.0;
    const RunningStats mc = ParallelMonteCarlo(
        10'000'000, 32, 1,
        [&](RngStream& rng) { return sol.Estimate(q + SampleLaplace(b, rng)); });
    const double var = *EstimatorVariance(sol, q);
    EXPECT_NEAR(var, mc.Variance(), 0.2 * var);
    EXPECT_NEAR(var, mc.Variance(), 4.0 * mc.StdErrorOfVariance());
  }
}

// ---------------------------------------------------------------------------
TEST(SolveTest, MatchesProjectedGradientOracle) {
  const std::vector<ExtensionProblem> problems = {
      MakeProblem("inverse", 1.0, 6, 2.0, "point:5"),
      MakeProblem("inverse", 1.0, 4, 1.0, "uniform:1:10"),
      MakeProblem("cos:1", 0.0, 5, 0.5, "discrete:0.5@1,2@1"),
      MakeProblem("kth_root:2", 1.0, 3, 1.0, "point:1"),
      MakeProblem("inverse", 2.0, 5, 0.5, "uniform:2:4"),
  };
  for (const ExtensionProblem& p : problems) {
    auto sol = Solve(p);
    ASSERT_TRUE(sol.ok());
    const std::vector<double> oracle = ProjectedGradientOracle(p);
    const auto& got = sol->g_scaled().coeffs();
    for (size_t i = 0; i < oracle.size(); ++i) {
      const double v = i < got.size() ? got[i] : 0.0;
      EXPECT_NEAR(v, oracle[i], 1e-6)
          << p.f.Spec() << " k=" << p.degree << " coefficient " << i;
    }
  }
}

}  // namespace
}  // namespace debias
