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

#include "debias/mean_mechanisms.h"

#include <algorithm>
#include <cmath>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace debias {

absl::StatusOr<Dataset> Dataset::Create(int64_t n, double s) {
  if (n < 0) return absl::InvalidArgumentError("n must be >= 0");
  if (!(s >= 0.0 && s <= static_cast<double>(n))) {
    return absl::InvalidArgumentError(
        absl::StrCat("sum ", s, " outside [0, n] for n = ", n));
  }
  return Dataset{n, s};
}

absl::StatusOr<MuParams> MuParams::Create(double eps1, double eps2, int k,
                                          double lower_bound) {
  auto prior = PriorMeasure::PointMass(lower_bound);
  if (!prior.ok()) return prior.status();
  return Create(eps1, eps2, k, lower_bound, *std::move(prior));
}

absl::StatusOr<MuParams> MuParams::Create(double eps1, double eps2, int k,
                                          double lower_bound,
                                          PriorMeasure prior) {
  if (!(eps1 > 0.0) || !(eps2 > 0.0)) {
    return absl::InvalidArgumentError("eps1 and eps2 must be > 0");
  }
  if (!(lower_bound > 0.0)) {
    return absl::InvalidArgumentError("L must be > 0 for the inverse");
  }
  auto problem = ExtensionProblem::Create(
      SmoothFunction::Inverse(), lower_bound, k, 1.0 / eps1, std::move(prior));
  if (!problem.ok()) return problem.status();
  auto sol = Solve(*problem);
  if (!sol.ok()) return sol.status();
  return MuParams(eps1, eps2, *std::move(sol));
}

absl::StatusOr<MssParams> MssParams::Create(double eps1, double eps2,
                                            double beta, double tau) {
  if (!(eps1 > 0.0) || !(eps2 > 0.0) || !(beta > 0.0) || !(tau > 0.0)) {
    return absl::InvalidArgumentError("eps1, eps2, beta, tau must be > 0");
  }
  const double implied = 4.0 * beta + 2.0 / (std::sqrt(3.0) * tau);
  if (std::abs(implied - eps2) > 1e-12 * eps2) {
    return absl::InvalidArgumentError(absl::StrCat(
        "beta and tau spend ", implied, " but eps2 is ", eps2));
  }
  return MssParams(eps1, eps2, beta, tau);
}

absl::StatusOr<MssParams> MssParams::WithDefaultNoise(double eps1,
                                                      double eps2) {
  if (!(eps2 > 0.0)) return absl::InvalidArgumentError("eps2 must be > 0");
  return Create(eps1, eps2, eps2 / 12.0, std::sqrt(3.0) / eps2);
}

absl::string_view MechanismName(MeanMechanism m) {
  return m == MeanMechanism::kUnbiased ? "M_U" : "M_SS";
}

MeanRelease RunMu(const Dataset& d, const MuParams& p, RngStream& rng) {
  const double n_tilde =
      static_cast<double>(d.n) + SampleLaplace(1.0 / p.eps1(), rng);
  const double s_tilde = d.s + SampleLaplace(1.0 / p.eps2(), rng);
  const double v_tilde = p.extension().Estimate(n_tilde);
  return {n_tilde, s_tilde * v_tilde, MeanMechanism::kUnbiased, rng.seed(),
          rng.stream_id()};
}

absl::StatusOr<double> MuVariance(const Dataset& d, const MuParams& p) {
  const double n = static_cast<double>(d.n);
  if (n < p.lower_bound()) {
    return absl::InvalidArgumentError(
        absl::StrCat("n = ", d.n, " is below L = ", p.lower_bound()));
  }
  auto var_g = EstimatorVariance(p.extension(), n);
  if (!var_g.ok()) return var_g.status();
  const double s2 = d.s * d.s;
  const double var_s = 2.0 / (p.eps2() * p.eps2());
  const double inv_n2 = 1.0 / (n * n);
  return std::max(0.0, (s2 + var_s) * (inv_n2 + *var_g) - s2 * inv_n2);
}

double MssNoiseMultiplier(int64_t n, const MssParams& p) {
  const double nd = static_cast<double>(n);
  return p.tau() * std::max(std::exp(-p.beta() * (nd - 1.0)),
                            1.0 / std::max(nd, 1.0));
}

MeanRelease RunMss(const Dataset& d, const MssParams& p, RngStream& rng) {
  const double n_tilde =
      static_cast<double>(d.n) + SampleLaplace(1.0 / p.eps1(), rng);
  const double center = d.n >= 1 ? d.s / static_cast<double>(d.n) : 1.0;
  const double m_tilde =
      center + SampleStudentT3(MssNoiseMultiplier(d.n, p), rng);
  return {n_tilde, m_tilde, MeanMechanism::kSmoothSensitivity, rng.seed(),
          rng.stream_id()};
}

double MssVariance(const Dataset& d, const MssParams& p) {
  const double m = MssNoiseMultiplier(d.n, p);
  return 3.0 * m * m;
}

absl::StatusOr<std::vector<SweepRow>> SdSweep(std::span<const int64_t> n_grid,
                                              double m_fixed,
                                              const MuParams& mu,
                                              const MssParams& mss) {
  if (!(m_fixed >= 0.0 && m_fixed <= 1.0)) {
    return absl::InvalidArgumentError("m must lie in [0, 1]");
  }
  std::vector<SweepRow> rows;
  rows.reserve(n_grid.size());
  for (int64_t n : n_grid) {
    const Dataset d{n, m_fixed * static_cast<double>(n)};
    auto var_mu = MuVariance(d, mu);
    if (!var_mu.ok()) return var_mu.status();
    const double sd_mu = std::sqrt(*var_mu);
    const double sd_mss = std::sqrt(MssVariance(d, mss));
    rows.push_back({n, sd_mu, sd_mss, sd_mss / sd_mu});
  }
  return rows;
}

}  // namespace debias
