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

#ifndef DEBIAS_PRDP_H_
#define DEBIAS_PRDP_H_

#include <cstdint>
#include <span>

#include "absl/status/statusor.h"
#include "debias/laplace_debias.h"
#include "debias/noise.h"
#include "debias/smooth_function.h"

namespace debias {

// Transformation mechanism for a nonnegative sum query q: release
// v~ = f(q + a) + Lap(b) for a concave, strictly increasing f, and estimate
// q by g(v~) - a where g is an unbiased Laplace estimator of f^{-1}.
class TransformSpec {
 public:
  // Checks monotonicity and concavity of f and g_inverse.f(f(x)) = x on a
  // probe grid over [a, a + 1e4].
  static absl::StatusOr<TransformSpec> Create(SmoothFunction f, double a,
                                              double b,
                                              LaplaceEstimator g_inverse);
  // f = kth_root(k), g_inverse = power(k) estimator.
  static absl::StatusOr<TransformSpec> KthRoot(int k, double a, double b);
  // f = identity: the plain Laplace mechanism.
  static absl::StatusOr<TransformSpec> Identity(double a, double b);

  const SmoothFunction& f() const { return f_; }
  double a() const { return a_; }
  double b() const { return b_; }
  const LaplaceEstimator& g_inverse() const { return g_inverse_; }

  std::string DebugString() const;

 private:
  TransformSpec(SmoothFunction f, double a, double b, LaplaceEstimator g)
      : f_(std::move(f)), a_(a), b_(b), g_inverse_(std::move(g)) {}

  SmoothFunction f_;
  double a_;
  double b_;
  LaplaceEstimator g_inverse_;
};

struct PrdpRelease {
  double s_tilde;
  double v_tilde;
  std::string spec;
  uint64_t seed;
  uint64_t stream_id;
};

absl::StatusOr<PrdpRelease> TransformRelease(double q, const TransformSpec& spec,
                                             RngStream& rng);

// Privacy loss bound for a record with value r_c: (f(r_c + a) - f(a)) / b.
absl::StatusOr<double> Policy(double r_c, const TransformSpec& spec);

// Sup over every multiset database of at most max_db_size values from the
// grid of |f(sum + r_c + a) - f(sum + a)|.
absl::StatusOr<double> PerRecordSensitivityBruteForce(
    double r_c, const TransformSpec& spec, std::span<const double> value_grid,
    int max_db_size);

struct DpRatioResult {
  double max_log_ratio;  // largest |log p0/p1| over merged bins
  double bound;          // Policy(r_c)
  double slack;          // 3 standard errors of the bin attaining the max
  bool within_bound;     // every bin satisfies |log ratio| <= bound + 3 SE
  int merged_bins;
};

// Histograms v~ for true values q0 and q0 + r_c with n_samples draws each
// and compares binned log density ratios to the policy bound. Adjacent bins
// are merged until each holds enough draws from both samples. A statistical
// diagnostic, not a proof.
absl::StatusOr<DpRatioResult> DpRatioCheck(double q0, double r_c,
                                           const TransformSpec& spec,
                                           int64_t n_samples, int bins,
                                           uint64_t seed);

}  // namespace debias

#endif  // DEBIAS_PRDP_H_
