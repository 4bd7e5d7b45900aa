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

#ifndef DEBIAS_NOISE_H_
#define DEBIAS_NOISE_H_

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <variant>
#include <vector>

#include "absl/status/statusor.h"

namespace debias {

// A reproducible random stream identified by (seed, stream_id).
//
// The engine is std::mt19937_64 seeded through std::seed_seq with the four
// 32-bit halves of seed and stream_id, so distinct stream ids give unrelated
// engine states. Uniforms are built from the top 53 bits of each 64-bit draw
// and normals by Box-Muller, so sequences do not depend on the standard
// library's distribution implementations.
class RngStream {
 public:
  RngStream(uint64_t seed, uint64_t stream_id);

  uint64_t seed() const { return seed_; }
  uint64_t stream_id() const { return stream_id_; }

  uint64_t NextBits() { return engine_(); }

  // Uniform on the open interval (0, 1).
  double Uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double StandardNormal();

 private:
  uint64_t seed_;
  uint64_t stream_id_;
  std::mt19937_64 engine_;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

// Zero-centered Laplace(0, b) draw by inverse CDF: the low bit of one 64-bit
// word picks the sign and its top 53 bits give u, returning sign * b * ln(u).
inline double SampleLaplace(double b, RngStream& rng) {
  const uint64_t bits = rng.NextBits();
  const double u = (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
  const double magnitude = -b * std::log(u);
  return (bits & 1) ? magnitude : -magnitude;
}

// Student t with 3 degrees of freedom times `scale`, by the ratio
// N0 / sqrt((N1^2 + N2^2 + N3^2) / 3) of independent standard normals.
double SampleStudentT3(double scale, RngStream& rng);

struct LaplaceNoise {
  double scale;
};

struct StudentT3Noise {
  double scale;
};

// A noise distribution known only through its raw moments mu_0..mu_p
// (mu_0 == 1), optionally with a sampler.
struct MomentNoise {
  std::vector<double> moments;
  std::function<double(RngStream&)> sampler;
};

class NoiseModel {
 public:
  static absl::StatusOr<NoiseModel> Laplace(double scale);
  static absl::StatusOr<NoiseModel> StudentT3(double scale);
  static absl::StatusOr<NoiseModel> MomentsOnly(
      std::vector<double> moments,
      std::function<double(RngStream&)> sampler = nullptr);

  const std::variant<LaplaceNoise, StudentT3Noise, MomentNoise>& kind() const {
    return kind_;
  }

  bool HasSampler() const;

  // Raw moments mu_0..mu_p. Fails when they are not available: p beyond a
  // moments-only vector, or p >= 3 for t3, whose third moment does not exist.
  absl::StatusOr<std::vector<double>> Moments(int p) const;

 private:
  explicit NoiseModel(std::variant<LaplaceNoise, StudentT3Noise, MomentNoise> k)
      : kind_(std::move(k)) {}

  std::variant<LaplaceNoise, StudentT3Noise, MomentNoise> kind_;
};

// One zero-centered draw. Fails for a moments-only model without a sampler.
absl::StatusOr<double> Sample(const NoiseModel& model, RngStream& rng);

// mu_r = r! b^r for even r and 0 for odd r, r = 0..p.
std::vector<double> LaplaceMoments(double b, int p);

}  // namespace debias

#endif  // DEBIAS_NOISE_H_
