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

#ifndef DEBIAS_EXTENSION_OPTIMIZER_H_
#define DEBIAS_EXTENSION_OPTIMIZER_H_

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "debias/polynomial.h"
#include "debias/smooth_function.h"

namespace debias {

// Largest supported extension degree.
inline constexpr int kMaxExtensionDegree = 30;

// Prior over the true value q >= L used to weight the expected squared error.
// Either finitely many atoms or a uniform density on [lo, hi]. Atom weights
// are normalized on construction.
class PriorMeasure {
 public:
  struct Atom {
    double q;
    double weight;
  };

  static absl::StatusOr<PriorMeasure> Discrete(std::vector<Atom> atoms);
  static absl::StatusOr<PriorMeasure> Uniform(double lo, double hi);
  static absl::StatusOr<PriorMeasure> PointMass(double q) {
    return Discrete({{q, 1.0}});
  }

  // "uniform:LO:HI", "point:Q" or "discrete:Q1@W1,Q2@W2,...".
  static absl::StatusOr<PriorMeasure> Parse(absl::string_view spec);

  bool is_uniform() const { return uniform_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double SupportMin() const { return uniform_ ? lo_ : atoms_min_; }

  std::string Spec() const;

 private:
  PriorMeasure() = default;

  bool uniform_ = false;
  std::vector<Atom> atoms_;
  double atoms_min_ = 0.0;
  double lo_ = 0.0;
  double hi_ = 0.0;
};

// Find a degree-k polynomial extension h of f below L (matching f, f', f''
// at L) whose estimator g = h - b^2 h'' minimizes the prior-weighted expected
// squared error over the region x < L.
struct ExtensionProblem {
  SmoothFunction f;
  double lower_bound;  // L
  int degree;          // k, 2 <= k <= kMaxExtensionDegree
  double noise_scale;  // b
  PriorMeasure prior;

  static absl::StatusOr<ExtensionProblem> Create(SmoothFunction f,
                                                 double lower_bound, int degree,
                                                 double noise_scale,
                                                 PriorMeasure prior);
};

// Prior integrals that the objective depends on:
//   w    = E_mu[e^{(L-q)/b}]
//   w_f  = E_mu[f(q) e^{(L-q)/b}]
//   w_ff = E_mu[f(q)^2 e^{(L-q)/b}]
struct PriorWeights {
  double w;
  double w_f;
  double w_ff;
};

absl::StatusOr<PriorWeights> ComputePriorWeights(const ExtensionProblem& p);

// Exact M_m = \int_{-inf}^{L} x^m e^{(x-L)/b} dx via M_0 = b and
// M_m = b L^m - m b M_{m-1}.
double TailMoment(int m, double lower_bound, double b);

// The optimization reduced to the free coordinates.
//
// The estimator on x < L is written in the scaled, reflected variable
// t = (L - x)/b in the Laguerre basis, g(x) = sum_i y_i Lag_i(t), which is
// orthonormal for the weight e^{-t} on [0, inf). The left-region objective
// is then exactly
//
//   J(y) = 0.5 * (w |y|^2 - 2 w_f y_0 + w_ff),
//
// and the three pasting constraints are linear in y. Solving them for
// y_0..y_2 gives the affine map y_head = offset + map * z over the free
// coordinates z = y_3..y_k, and J becomes 0.5 z'Qz + c'z + const_term with
// Q = w (I + map' map).
struct ReducedQp {
  Eigen::MatrixXd q;
  Eigen::VectorXd c;
  double const_term;
  Eigen::Vector3d offset;
  Eigen::MatrixXd map;  // 3 x (k-2)
  PriorWeights weights;

  int num_free() const { return static_cast<int>(c.size()); }
  double Objective(const Eigen::VectorXd& z) const;
  Eigen::VectorXd Gradient(const Eigen::VectorXd& z) const;
  // y_0..y_k for the given free coordinates.
  Eigen::VectorXd FullCoefficients(const Eigen::VectorXd& z) const;
};

absl::StatusOr<ReducedQp> BuildReducedQp(const ExtensionProblem& p);

class ExtensionSolution {
 public:
  const ExtensionProblem& problem() const { return problem_; }

  // Left-region estimator g and extension h in raw x coordinates.
  const Polynomial& g() const { return g_; }
  const Polynomial& h() const { return h_; }
  // The same polynomials in t = (L - x)/b.
  const Polynomial& g_scaled() const { return g_scaled_; }
  const Polynomial& h_scaled() const { return h_scaled_; }
  // Laguerre coordinates y_0..y_k of g.
  const Eigen::VectorXd& laguerre() const { return laguerre_; }
  const Eigen::VectorXd& free_coordinates() const { return free_; }

  double objective() const { return objective_; }
  double taylor_objective() const { return taylor_objective_; }
  double grad_norm() const { return grad_norm_; }
  double q_condition() const { return q_condition_; }
  // Set when the prior weight w underflowed and the least-norm constraint
  // solution was returned instead of a Newton step.
  bool used_fallback() const { return used_fallback_; }

  // g(x) for x < L, evaluated stably through the Laguerre recurrence.
  double EvaluateLeft(double x) const;
  // h(x) for x < L.
  double EvaluateExtension(double x) const;
  // The full estimator: g(x) below L, f(x) - b^2 f''(x) from L on.
  double Estimate(double x) const;

 private:
  friend absl::StatusOr<ExtensionSolution> Solve(const ExtensionProblem& p);
  explicit ExtensionSolution(ExtensionProblem p) : problem_(std::move(p)) {}

  ExtensionProblem problem_;
  Polynomial g_, h_, g_scaled_, h_scaled_;
  Eigen::VectorXd laguerre_;
  Eigen::VectorXd free_;
  double objective_ = 0.0;
  double taylor_objective_ = 0.0;
  double grad_norm_ = 0.0;
  double q_condition_ = 1.0;
  bool used_fallback_ = false;
};

// Builds the reduced problem and takes one Newton step from the Taylor
// extension (all free coordinates zero). The objective is quadratic, so this
// is the exact minimizer.
absl::StatusOr<ExtensionSolution> Solve(const ExtensionProblem& p);

// E[estimator(q + Z)], Z ~ Lap(0, b), for q >= L. The polynomial part is
// integrated exactly; the region x >= L uses adaptive quadrature.
absl::StatusOr<double> EstimatorExpectation(const ExtensionSolution& sol,
                                            double q);

// Var[estimator(q + Z)] by the same split.
absl::StatusOr<double> EstimatorVariance(const ExtensionSolution& sol,
                                         double q);

// Left-region objective of an arbitrary raw-coordinate g, computed through
// monomial tail moments rather than the Laguerre basis.
absl::StatusOr<double> EvaluateObjective(const ExtensionProblem& p,
                                         const Polynomial& g);

// Raw-coordinate maps between an extension h and its estimator
// g = h - b^2 h''. ExtensionFromEstimator inverts the triangular system
// h_i = g_i + b^2 (i+2)(i+1) h_{i+2} from the top degree down.
Polynomial EstimatorFromExtension(const Polynomial& h, double b);
Polynomial ExtensionFromEstimator(const Polynomial& g, double b);

// h(L) - f(L), h'(L) - f'(L), h''(L) - f''(L) for a solution.
std::array<double, 3> ConstraintResiduals(const ExtensionSolution& sol);

}  // namespace debias

#endif  // DEBIAS_EXTENSION_OPTIMIZER_H_
