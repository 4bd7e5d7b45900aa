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

#ifndef DEBIAS_MEAN_MECHANISMS_H_
#define DEBIAS_MEAN_MECHANISMS_H_

#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "debias/extension_optimizer.h"
#include "debias/noise.h"

namespace debias {

// Record count n and sum s of an attribute bounded in [0, 1]. The sweep sets
// s = m n exactly, so s need not be a sum of actual records.
struct Dataset {
  int64_t n = 0;
  double s = 0.0;

  static absl::StatusOr<Dataset> Create(int64_t n, double s);
};

// Parameters of the unbiased mean mechanism M_U. The sample-size estimator
// is the optimized polynomial extension of 1/n below L at noise scale 1/eps1.
class MuParams {
 public:
  // The prior defaults to a point mass at L; the optimal extension does not
  // depend on it.
  static absl::StatusOr<MuParams> Create(double eps1, double eps2, int k,
                                         double lower_bound);
  static absl::StatusOr<MuParams> Create(double eps1, double eps2, int k,
                                         double lower_bound,
                                         PriorMeasure prior);

  double eps1() const { return eps1_; }
  double eps2() const { return eps2_; }
  int k() const { return extension_.problem().degree; }
  double lower_bound() const { return extension_.problem().lower_bound; }
  const ExtensionSolution& extension() const { return extension_; }

 private:
  MuParams(double eps1, double eps2, ExtensionSolution extension)
      : eps1_(eps1), eps2_(eps2), extension_(std::move(extension)) {}

  double eps1_;
  double eps2_;
  ExtensionSolution extension_;
};

// Parameters of the smooth-sensitivity mean mechanism M_SS. Requires
// eps2 = 4 beta + 2 / (sqrt(3) tau).
class MssParams {
 public:
  static absl::StatusOr<MssParams> Create(double eps1, double eps2, double beta,
                                          double tau);
  // beta = eps2 / 12, tau = sqrt(3) / eps2.
  static absl::StatusOr<MssParams> WithDefaultNoise(double eps1, double eps2);

  double eps1() const { return eps1_; }
  double eps2() const { return eps2_; }
  double beta() const { return beta_; }
  double tau() const { return tau_; }

 private:
  MssParams(double eps1, double eps2, double beta, double tau)
      : eps1_(eps1), eps2_(eps2), beta_(beta), tau_(tau) {}

  double eps1_, eps2_, beta_, tau_;
};

enum class MeanMechanism { kUnbiased, kSmoothSensitivity };

absl::string_view MechanismName(MeanMechanism m);

struct MeanRelease {
  double n_tilde;
  double m_tilde;
  MeanMechanism mechanism;
  uint64_t seed;
  uint64_t stream_id;
};

// n~ = n + Lap(1/eps1), s~ = s + Lap(1/eps2), m~ = s~ g(n~).
MeanRelease RunMu(const Dataset& d, const MuParams& p, RngStream& rng);

// (s^2 + 2/eps2^2)(1/n^2 + V[g(n~)]) - s^2/n^2. Fails for n < L.
absl::StatusOr<double> MuVariance(const Dataset& d, const MuParams& p);

// tau max(e^{-beta (n-1)}, 1/max(n, 1)).
double MssNoiseMultiplier(int64_t n, const MssParams& p);

// n~ as in RunMu; m~ = (n >= 1 ? s/n : 1) + T3 * MssNoiseMultiplier(n).
MeanRelease RunMss(const Dataset& d, const MssParams& p, RngStream& rng);

// 3 MssNoiseMultiplier(n)^2.
double MssVariance(const Dataset& d, const MssParams& p);

struct SweepRow {
  int64_t n;
  double sd_mu;
  double sd_mss;
  double ratio;  // sd_mss / sd_mu
};

// Analytic standard deviations of both mechanisms with s = m_fixed * n.
absl::StatusOr<std::vector<SweepRow>> SdSweep(std::span<const int64_t> n_grid,
                                              double m_fixed,
                                              const MuParams& mu,
                                              const MssParams& mss);

}  // namespace debias

#endif  // DEBIAS_MEAN_MECHANISMS_H_
