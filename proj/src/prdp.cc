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

#include "debias/prdp.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace debias {
namespace {

constexpr int64_t kMinBinCount = 1000;

std::vector<double> ProbeGrid(double a) {
  std::vector<double> grid;
  for (double x = 0.0; x <= 1.0; x += 0.0625) grid.push_back(a + x);
  for (double x = 1.25; x <= 1e4; x *= 1.25) grid.push_back(a + x);
  return grid;
}

}  // namespace

absl::StatusOr<TransformSpec> TransformSpec::Create(SmoothFunction f, double a,
                                                    double b,
                                                    LaplaceEstimator g_inverse) {
  if (!(a >= 0.0)) return absl::InvalidArgumentError("a must be >= 0");
  if (!(b > 0.0)) return absl::InvalidArgumentError("b must be > 0");
  if (g_inverse.b() != b) {
    return absl::InvalidArgumentError(absl::StrCat(
        "g_inverse noise scale ", g_inverse.b(), " differs from b = ", b));
  }
  const std::vector<double> grid = ProbeGrid(a);
  double prev_slope = INFINITY;
  for (size_t i = 0; i + 1 < grid.size(); ++i) {
    const double fx = f.Value(grid[i]);
    const double fy = f.Value(grid[i + 1]);
    if (!(fy > fx)) {
      return absl::InvalidArgumentError(
          absl::StrCat(f.Spec(), " is not strictly increasing near ", grid[i]));
    }
    const double slope = (fy - fx) / (grid[i + 1] - grid[i]);
    if (slope > prev_slope * (1.0 + 1e-9)) {
      return absl::InvalidArgumentError(
          absl::StrCat(f.Spec(), " is not concave near ", grid[i]));
    }
    prev_slope = slope;
  }
  for (double x : grid) {
    const double back = g_inverse.function().Value(f.Value(x));
    if (std::abs(back - x) > 1e-9 * std::max(1.0, std::abs(x))) {
      return absl::InvalidArgumentError(absl::StrCat(
          g_inverse.function().Spec(), " does not invert ", f.Spec(), " at ",
          x));
    }
  }
  return TransformSpec(std::move(f), a, b, std::move(g_inverse));
}

absl::StatusOr<TransformSpec> TransformSpec::KthRoot(int k, double a,
                                                     double b) {
  if (k < 1) return absl::InvalidArgumentError("k must be >= 1");
  auto g = LaplaceEstimator::Create(SmoothFunction::Power(k), b);
  if (!g.ok()) return g.status();
  return Create(SmoothFunction::KthRoot(k), a, b, *std::move(g));
}

absl::StatusOr<TransformSpec> TransformSpec::Identity(double a, double b) {
  auto g = LaplaceEstimator::Create(SmoothFunction::Identity(), b);
  if (!g.ok()) return g.status();
  return Create(SmoothFunction::Identity(), a, b, *std::move(g));
}

std::string TransformSpec::DebugString() const {
  return absl::StrCat("f=", f_.Spec(), " a=", a_, " b=", b_,
                      " g=", g_inverse_.function().Spec());
}

absl::StatusOr<PrdpRelease> TransformRelease(double q, const TransformSpec& spec,
                                             RngStream& rng) {
  if (!(q >= 0.0)) return absl::InvalidArgumentError("q must be >= 0");
  const double v = spec.f().Value(q + spec.a());
  const double v_tilde = v + SampleLaplace(spec.b(), rng);
  const double s_tilde = spec.g_inverse().Estimate(v_tilde) - spec.a();
  return PrdpRelease{s_tilde, v_tilde, spec.DebugString(), rng.seed(),
                     rng.stream_id()};
}

absl::StatusOr<double> Policy(double r_c, const TransformSpec& spec) {
  if (!(r_c >= 0.0)) return absl::InvalidArgumentError("r_c must be >= 0");
  return (spec.f().Value(r_c + spec.a()) - spec.f().Value(spec.a())) /
         spec.b();
}

absl::StatusOr<double> PerRecordSensitivityBruteForce(
    double r_c, const TransformSpec& spec, std::span<const double> value_grid,
    int max_db_size) {
  if (!(r_c >= 0.0)) return absl::InvalidArgumentError("r_c must be >= 0");
  if (max_db_size < 0) {
    return absl::InvalidArgumentError("max_db_size must be >= 0");
  }
  for (double v : value_grid) {
    if (!(v >= 0.0)) {
      return absl::InvalidArgumentError("grid values must be >= 0");
    }
  }
  const double a = spec.a();
  double sup = 0.0;
  // Depth-first over nondecreasing index sequences, one per multiset.
  auto visit = [&](auto&& self, size_t start, int size, double sum) -> void {
    sup = std::max(sup, std::abs(spec.f().Value(sum + r_c + a) -
                                 spec.f().Value(sum + a)));
    if (size == max_db_size) return;
    for (size_t i = start; i < value_grid.size(); ++i) {
      self(self, i, size + 1, sum + value_grid[i]);
    }
  };
  visit(visit, 0, 0, 0.0);
  return sup;
}

absl::StatusOr<DpRatioResult> DpRatioCheck(double q0, double r_c,
                                           const TransformSpec& spec,
                                           int64_t n_samples, int bins,
                                           uint64_t seed) {
  if (n_samples < 1'000'000) {
    return absl::InvalidArgumentError("n_samples must be >= 10^6");
  }
  if (bins < 2) return absl::InvalidArgumentError("bins must be >= 2");
  if (!(q0 >= 0.0)) return absl::InvalidArgumentError("q0 must be >= 0");
  auto bound = Policy(r_c, spec);
  if (!bound.ok()) return bound.status();

  const double v0 = spec.f().Value(q0 + spec.a());
  const double v1 = spec.f().Value(q0 + r_c + spec.a());
  const double b = spec.b();
  const double lo = std::min(v0, v1) - 8.0 * b;
  const double hi = std::max(v0, v1) + 8.0 * b;
  const double width = (hi - lo) / bins;

  std::vector<int64_t> c0(bins, 0), c1(bins, 0);
  auto bin_of = [&](double x) {
    const double pos = std::floor((x - lo) / width);
    return static_cast<int>(std::clamp(pos, 0.0, bins - 1.0));
  };
  RngStream rng0(seed, 0), rng1(seed, 1);
  for (int64_t i = 0; i < n_samples; ++i) {
    ++c0[bin_of(v0 + SampleLaplace(b, rng0))];
    ++c1[bin_of(v1 + SampleLaplace(b, rng1))];
  }

  // Greedy left-to-right merge; a short trailing group joins its neighbour.
  std::vector<std::pair<int64_t, int64_t>> groups;
  int64_t acc0 = 0, acc1 = 0;
  for (int i = 0; i < bins; ++i) {
    acc0 += c0[i];
    acc1 += c1[i];
    if (acc0 >= kMinBinCount && acc1 >= kMinBinCount) {
      groups.push_back({acc0, acc1});
      acc0 = acc1 = 0;
    }
  }
  if (acc0 > 0 || acc1 > 0) {
    if (groups.empty()) {
      groups.push_back({acc0, acc1});
    } else {
      groups.back().first += acc0;
      groups.back().second += acc1;
    }
  }

  DpRatioResult result{0.0, *bound, 0.0, true,
                       static_cast<int>(groups.size())};
  for (const auto& [g0, g1] : groups) {
    if (g0 == 0 || g1 == 0) {
      result.within_bound = false;
      result.max_log_ratio = INFINITY;
      continue;
    }
    const double lr = std::abs(std::log(static_cast<double>(g0) / g1));
    const double se = std::sqrt(1.0 / g0 + 1.0 / g1);
    if (lr > *bound + 3.0 * se) result.within_bound = false;
    if (lr > result.max_log_ratio) {
      result.max_log_ratio = lr;
      result.slack = 3.0 * se;
    }
  }
  return result;
}

}  // namespace debias
