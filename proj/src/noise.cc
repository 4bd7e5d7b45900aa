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

#include "debias/noise.h"

#include <algorithm>
#include <numbers>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace debias {

RngStream::RngStream(uint64_t seed, uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(stream_id),
                    static_cast<uint32_t>(stream_id >> 32)};
  engine_.seed(seq);
}

double RngStream::StandardNormal() {
  if (has_spare_normal_) {
    has_spare_normal_ = false;
    return spare_normal_;
  }
  const double radius = std::sqrt(-2.0 * std::log(Uniform()));
  const double angle = 2.0 * std::numbers::pi * Uniform();
  spare_normal_ = radius * std::sin(angle);
  has_spare_normal_ = true;
  return radius * std::cos(angle);
}

double SampleStudentT3(double scale, RngStream& rng) {
  const double z = rng.StandardNormal();
  double chi2 = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double n = rng.StandardNormal();
    chi2 += n * n;
  }
  return scale * z / std::sqrt(chi2 / 3.0);
}

absl::StatusOr<NoiseModel> NoiseModel::Laplace(double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    return absl::InvalidArgumentError("Laplace scale must be positive");
  }
  return NoiseModel(LaplaceNoise{scale});
}

absl::StatusOr<NoiseModel> NoiseModel::StudentT3(double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    return absl::InvalidArgumentError("t3 scale must be positive");
  }
  return NoiseModel(StudentT3Noise{scale});
}

absl::StatusOr<NoiseModel> NoiseModel::MomentsOnly(
    std::vector<double> moments, std::function<double(RngStream&)> sampler) {
  if (moments.empty() || moments[0] != 1.0) {
    return absl::InvalidArgumentError(
        "moment vector must start with mu_0 = 1");
  }
  return NoiseModel(MomentNoise{std::move(moments), std::move(sampler)});
}

bool NoiseModel::HasSampler() const {
  if (const auto* m = std::get_if<MomentNoise>(&kind_)) {
    return static_cast<bool>(m->sampler);
  }
  return true;
}

absl::StatusOr<std::vector<double>> NoiseModel::Moments(int p) const {
  if (p < 0) return absl::InvalidArgumentError("moment order must be >= 0");
  if (const auto* lap = std::get_if<LaplaceNoise>(&kind_)) {
    return LaplaceMoments(lap->scale, p);
  }
  if (const auto* t3 = std::get_if<StudentT3Noise>(&kind_)) {
    if (p >= 3) {
      return absl::FailedPreconditionError(
          "t3 noise has no finite moments of order >= 3");
    }
    std::vector<double> mu = {1.0, 0.0, 3.0 * t3->scale * t3->scale};
    mu.resize(p + 1);
    return mu;
  }
  const auto& m = std::get<MomentNoise>(kind_);
  if (static_cast<size_t>(p) >= m.moments.size()) {
    return absl::FailedPreconditionError(
        absl::StrCat("only ", m.moments.size() - 1,
                     " moments are known, asked for ", p));
  }
  return std::vector<double>(m.moments.begin(), m.moments.begin() + p + 1);
}

absl::StatusOr<double> Sample(const NoiseModel& model, RngStream& rng) {
  if (const auto* lap = std::get_if<LaplaceNoise>(&model.kind())) {
    return SampleLaplace(lap->scale, rng);
  }
  if (const auto* t3 = std::get_if<StudentT3Noise>(&model.kind())) {
    return SampleStudentT3(t3->scale, rng);
  }
  const auto& m = std::get<MomentNoise>(model.kind());
  if (!m.sampler) {
    return absl::FailedPreconditionError(
        "moments-only noise model has no sampler");
  }
  return m.sampler(rng);
}

std::vector<double> LaplaceMoments(double b, int p) {
  std::vector<double> mu(static_cast<size_t>(std::max(p, 0)) + 1, 0.0);
  mu[0] = 1.0;
  double even = 1.0;  // r! b^r for the current even r
  for (int r = 2; r <= p; r += 2) {
    even *= static_cast<double>(r) * static_cast<double>(r - 1) * b * b;
    mu[r] = even;
  }
  return mu;
}

}  // namespace debias
