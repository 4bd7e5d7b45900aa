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

#include "debias/laplace_debias.h"

#include <cmath>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "debias/polynomial.h"

namespace debias {

absl::StatusOr<LaplaceEstimator> LaplaceEstimator::Create(SmoothFunction f,
                                                          double b) {
  if (!(b > 0.0) || !std::isfinite(b)) {
    return absl::InvalidArgumentError("Laplace scale b must be positive");
  }
  if (!f.twice_differentiable()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "'", f.Spec(),
        "' is not twice differentiable on the real line; the closed-form "
        "estimator does not apply. For abs use PlugInBiasAbs (bias-check); "
        "for functions bounded below use the polynomial extension "
        "(optimize)"));
  }
  if (!f.polynomial_growth()) {
    return absl::InvalidArgumentError(
        absl::StrCat("'", f.Spec(), "' grows faster than a polynomial"));
  }
  return LaplaceEstimator(std::move(f), b);
}

double PowerEstimate(int k, double b, double x_tilde) {
  // Repeated multiplication, the same rounding sequence as Horner's rule on a
  // monomial, so this agrees bit-for-bit with the power(k) estimator.
  double lead = 1.0;
  for (int i = 0; i < k; ++i) lead *= x_tilde;
  if (k < 2) return lead;
  double correction = static_cast<double>(k) * (k - 1);
  for (int i = 0; i < k - 2; ++i) correction *= x_tilde;
  return lead - b * b * correction;
}

double PlugInBiasAbs(double q, double b) { return b * std::exp(-std::abs(q) / b); }

std::optional<double> PlugInBiasExact(const SmoothFunction& f, double q,
                                      double b) {
  switch (f.kind()) {
    case FunctionKind::kAbs:
      return PlugInBiasAbs(q, b);
    case FunctionKind::kCos: {
      const double u = f.params()[0];
      return std::cos(u * q) * (1.0 / (1.0 + b * b * u * u) - 1.0);
    }
    default:
      break;
  }
  const std::optional<Polynomial> p = f.AsPolynomial();
  if (!p.has_value()) return std::nullopt;
  // E[(q + Z)^n] - q^n = sum_{j < n} C(n, j) q^j mu_{n-j}.
  const auto& c = p->coeffs();
  const std::vector<double> mu = LaplaceMoments(b, static_cast<int>(c.size()));
  double bias = 0.0;
  for (size_t n = 0; n < c.size(); ++n) {
    double qj = 1.0;
    for (size_t j = 0; j < n; ++j) {
      bias += c[n] * Binomial(static_cast<int>(n), static_cast<int>(j)) * qj *
              mu[n - j];
      qj *= q;
    }
  }
  return bias;
}

absl::StatusOr<McEstimate> PlugInBiasMonteCarlo(const SmoothFunction& f,
                                                double q, double b,
                                                int64_t n_samples,
                                                uint64_t seed, int streams) {
  if (n_samples < 10000) {
    return absl::InvalidArgumentError("need at least 10^4 samples");
  }
  if (!(b > 0.0)) return absl::InvalidArgumentError("b must be positive");
  const double fq = f.Value(q);
  RunningStats stats = ParallelMonteCarlo(
      n_samples, seed, streams,
      [&](RngStream& rng) { return f.Value(q + SampleLaplace(b, rng)) - fq; });
  return McEstimate{stats.mean(), stats.StdErrorOfMean()};
}

McEstimate EstimatorMeanMonteCarlo(const LaplaceEstimator& estimator, double q,
                                   int64_t n_samples, uint64_t seed,
                                   int streams) {
  const double b = estimator.b();
  RunningStats stats = ParallelMonteCarlo(
      n_samples, seed, streams, [&](RngStream& rng) {
        return estimator.Estimate(q + SampleLaplace(b, rng));
      });
  return McEstimate{stats.mean(), stats.StdErrorOfMean()};
}

}  // namespace debias
