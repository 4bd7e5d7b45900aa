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

#ifndef DEBIAS_GENERAL_NOISE_H_
#define DEBIAS_GENERAL_NOISE_H_

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "absl/status/statusor.h"
#include "debias/polynomial.h"

namespace debias {

// Highest polynomial degree accepted by the moment-matrix solver.
inline constexpr int kMaxMomentDegree = 16;

// Upper-triangular binomial-moment matrix, M(j, n) = C(n, j) mu_{n-j} for
// n >= j. E[g(q + Z)] = f(q) for polynomials g = sum a_n x^n and
// f = sum b_j q^j is exactly M a = b.
class MomentMatrix {
 public:
  // Needs mu.size() >= p + 1 and mu[0] == 1.
  static absl::StatusOr<MomentMatrix> Create(std::span<const double> mu, int p);

  const Eigen::MatrixXd& matrix() const { return m_; }
  int degree() const { return static_cast<int>(m_.rows()) - 1; }

  // Back-substitution solve of M a = b.
  Eigen::VectorXd Solve(const Eigen::VectorXd& rhs) const;

  // Infinity-norm condition number ||M|| ||M^{-1}||.
  double ConditionNumber() const;

 private:
  explicit MomentMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {}
  Eigen::MatrixXd m_;
};

// Coefficients of the polynomial g with E[g(q + Z)] = target(q) for every q,
// given raw noise moments mu_0..mu_p (mu_0 = 1, p >= degree(target)).
absl::StatusOr<Polynomial> DebiasCoeffs(const Polynomial& target,
                                        std::span<const double> mu);

absl::StatusOr<double> DebiasEval(const Polynomial& target,
                                  std::span<const double> mu, double x_tilde);

// One coordinate of a product target prod_i target_i(q_i), each with its own
// independent noise moments.
struct CoordinateTarget {
  Polynomial target;
  std::vector<double> moments;
};

// prod_i g_i(x_i), unbiased for prod_i target_i(q_i) when the noise
// components are independent.
absl::StatusOr<double> MultivariateDebias(
    std::span<const CoordinateTarget> targets, std::span<const double> x_tildes);

}  // namespace debias

#endif  // DEBIAS_GENERAL_NOISE_H_
