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

#ifndef DEBIAS_LAPLACE_DEBIAS_H_
#define DEBIAS_LAPLACE_DEBIAS_H_

#include <cstdint>
#include <optional>

#include "absl/status/statusor.h"
#include "debias/monte_carlo.h"
#include "debias/noise.h"
#include "debias/smooth_function.h"

namespace debias {

// Unbiased estimator of f(q) from x~ = q + Lap(0, b):
//
//   g(x~) = f(x~) - b^2 f''(x~).
//
// Requires f twice differentiable on the whole real line with at most
// polynomial growth. Use PlugInBiasAbs / PlugInBiasMonteCarlo to study
// functions that do not qualify, such as |x|.
class LaplaceEstimator {
 public:
  static absl::StatusOr<LaplaceEstimator> Create(SmoothFunction f, double b);

  double Estimate(double x_tilde) const {
    return f_.Value(x_tilde) - b_ * b_ * f_.SecondDerivative(x_tilde);
  }

  const SmoothFunction& function() const { return f_; }
  double b() const { return b_; }

 private:
  LaplaceEstimator(SmoothFunction f, double b) : f_(std::move(f)), b_(b) {}

  SmoothFunction f_;
  double b_;
};

// Closed form for f(q) = q^k: x~^k - b^2 k (k-1) x~^(k-2). The correction
// vanishes for k < 2.
double PowerEstimate(int k, double b, double x_tilde);

// Exact bias of the plug-in |x~| as an estimate of |q|: b e^{-|q|/b}.
double PlugInBiasAbs(double q, double b);

// Exact plug-in bias E[f(q + Z)] - f(q) where a closed form is available:
// abs, cos(u) and polynomial entries. nullopt otherwise.
std::optional<double> PlugInBiasExact(const SmoothFunction& f, double q,
                                      double b);

// Monte-Carlo estimate of E[f(q + Z)] - f(q), Z ~ Lap(0, b), with its
// standard error. Requires n_samples >= 10^4.
absl::StatusOr<McEstimate> PlugInBiasMonteCarlo(const SmoothFunction& f,
                                                double q, double b,
                                                int64_t n_samples,
                                                uint64_t seed, int streams = 1);

// Monte-Carlo mean of estimator(q + Z) for a seeded run; the workhorse behind
// the unbiasedness checks.
McEstimate EstimatorMeanMonteCarlo(const LaplaceEstimator& estimator, double q,
                                   int64_t n_samples, uint64_t seed,
                                   int streams = 1);

}  // namespace debias

#endif  // DEBIAS_LAPLACE_DEBIAS_H_
