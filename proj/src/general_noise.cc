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

#include "debias/general_noise.h"

#include <algorithm>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace debias {

absl::StatusOr<MomentMatrix> MomentMatrix::Create(std::span<const double> mu,
                                                  int p) {
  if (p < 0) return absl::InvalidArgumentError("degree must be >= 0");
  if (p > kMaxMomentDegree) {
    return absl::InvalidArgumentError(absl::StrCat(
        "degree ", p, " exceeds the supported maximum ", kMaxMomentDegree));
  }
  if (mu.empty() || mu[0] != 1.0) {
    return absl::InvalidArgumentError("moments must start with mu_0 = 1");
  }
  if (mu.size() < static_cast<size_t>(p) + 1) {
    return absl::InvalidArgumentError(absl::StrCat(
        "degree ", p, " needs ", p + 1, " moments, got ", mu.size()));
  }
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(p + 1, p + 1);
  for (int j = 0; j <= p; ++j) {
    for (int n = j; n <= p; ++n) m(j, n) = Binomial(n, j) * mu[n - j];
  }
  return MomentMatrix(std::move(m));
}

Eigen::VectorXd MomentMatrix::Solve(const Eigen::VectorXd& rhs) const {
  return m_.triangularView<Eigen::Upper>().solve(rhs);
}

double MomentMatrix::ConditionNumber() const {
  const int n = static_cast<int>(m_.rows());
  const Eigen::MatrixXd inv =
      m_.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(n, n));
  auto inf_norm = [](const Eigen::MatrixXd& a) {
    return a.cwiseAbs().rowwise().sum().maxCoeff();
  };
  return inf_norm(m_) * inf_norm(inv);
}

absl::StatusOr<Polynomial> DebiasCoeffs(const Polynomial& target,
                                        std::span<const double> mu) {
  const int p = std::max(target.Degree(), 0);
  auto m = MomentMatrix::Create(mu, p);
  if (!m.ok()) return m.status();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(p + 1);
  for (int i = 0; i <= target.Degree(); ++i) rhs(i) = target.coeffs()[i];
  const Eigen::VectorXd a = m->Solve(rhs);
  return Polynomial(std::vector<double>(a.data(), a.data() + a.size()));
}

absl::StatusOr<double> DebiasEval(const Polynomial& target,
                                  std::span<const double> mu, double x_tilde) {
  auto g = DebiasCoeffs(target, mu);
  if (!g.ok()) return g.status();
  return g->Evaluate(x_tilde);
}

absl::StatusOr<double> MultivariateDebias(
    std::span<const CoordinateTarget> targets, std::span<const double> x_tildes) {
  if (targets.size() != x_tildes.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        targets.size(), " coordinate targets but ", x_tildes.size(),
        " noisy values"));
  }
  double product = 1.0;
  for (size_t i = 0; i < targets.size(); ++i) {
    auto v = DebiasEval(targets[i].target, targets[i].moments, x_tildes[i]);
    if (!v.ok()) return v.status();
    product *= *v;
  }
  return product;
}

}  // namespace debias
