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

#ifndef DEBIAS_MONTE_CARLO_H_
#define DEBIAS_MONTE_CARLO_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include "debias/noise.h"

namespace debias {

// Streaming mean and central moments up to order four, mergeable across
// workers (Welford/Pebay updates).
class RunningStats {
 public:
  void Add(double x) {
    const double n0 = static_cast<double>(count_);
    ++count_;
    const double n1 = static_cast<double>(count_);
    const double delta = x - mean_;
    const double delta_n = delta / n1;
    const double delta_n2 = delta_n * delta_n;
    const double term1 = delta * delta_n * n0;
    mean_ += delta_n;
    m4_ += term1 * delta_n2 * (n1 * n1 - 3 * n1 + 3) + 6 * delta_n2 * m2_ -
           4 * delta_n * m3_;
    m3_ += term1 * delta_n * (n1 - 2) - 3 * delta_n * m2_;
    m2_ += term1;
  }

  void Merge(const RunningStats& other);

  int64_t count() const { return count_; }
  double mean() const { return mean_; }
  // Unbiased sample variance.
  double Variance() const {
    return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0;
  }
  double StdErrorOfMean() const {
    return count_ > 0 ? std::sqrt(Variance() / static_cast<double>(count_))
                      : 0.0;
  }
  // Large-sample standard error of Variance(): sqrt((m4 - m2^2) / n).
  double StdErrorOfVariance() const;
  // Central moments m_r = M_r / n.
  double CentralMoment(int r) const;

 private:
  int64_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
  double m3_ = 0.0;
  double m4_ = 0.0;
};

struct McEstimate {
  double mean;
  double std_err;
};

// Runs `total` draws of sample(rng) split across `streams` independent
// RngStreams (seed, 0..streams-1) and merges in stream order, so the result
// depends only on (total, seed, streams) and not on the thread count.
template <typename SampleFn>
RunningStats ParallelMonteCarlo(int64_t total, uint64_t seed, int streams,
                                SampleFn sample) {
  streams = std::max(streams, 1);
  std::vector<RunningStats> per_stream(streams);
  auto run_stream = [&](int s) {
    RngStream rng(seed, static_cast<uint64_t>(s));
    const int64_t begin = total * s / streams;
    const int64_t end = total * (s + 1) / streams;
    RunningStats stats;
    for (int64_t i = begin; i < end; ++i) stats.Add(sample(rng));
    per_stream[s] = stats;
  };
  const int workers = std::min<int>(
      streams, std::max(1u, std::thread::hardware_concurrency()));
  if (workers == 1) {
    for (int s = 0; s < streams; ++s) run_stream(s);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (int s = w; s < streams; s += workers) run_stream(s);
      });
    }
    for (auto& t : pool) t.join();
  }
  RunningStats merged;
  for (const auto& s : per_stream) merged.Merge(s);
  return merged;
}

}  // namespace debias

#endif  // DEBIAS_MONTE_CARLO_H_
