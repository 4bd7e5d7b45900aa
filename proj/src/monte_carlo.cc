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

#include "debias/monte_carlo.h"

namespace debias {

void RunningStats::Merge(const RunningStats& other) {
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(count_);
  const double nb = static_cast<double>(other.count_);
  const double n = na + nb;
  const double delta = other.mean_ - mean_;
  const double delta2 = delta * delta;
  const double m2 = m2_ + other.m2_ + delta2 * na * nb / n;
  const double m3 = m3_ + other.m3_ + delta2 * delta * na * nb * (na - nb) / (n * n) +
                    3.0 * delta * (na * other.m2_ - nb * m2_) / n;
  const double m4 =
      m4_ + other.m4_ +
      delta2 * delta2 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n) +
      6.0 * delta2 * (na * na * other.m2_ + nb * nb * m2_) / (n * n) +
      4.0 * delta * (na * other.m3_ - nb * m3_) / n;
  mean_ += delta * nb / n;
  m2_ = m2;
  m3_ = m3;
  m4_ = m4;
  count_ += other.count_;
}

double RunningStats::StdErrorOfVariance() const {
  if (count_ < 2) return 0.0;
  const double n = static_cast<double>(count_);
  const double mom2 = m2_ / n;
  const double mom4 = m4_ / n;
  return std::sqrt(std::max(mom4 - mom2 * mom2, 0.0) / n);
}

double RunningStats::CentralMoment(int r) const {
  if (count_ == 0) return 0.0;
  const double n = static_cast<double>(count_);
  switch (r) {
    case 0:
      return 1.0;
    case 1:
      return 0.0;
    case 2:
      return m2_ / n;
    case 3:
      return m3_ / n;
    case 4:
      return m4_ / n;
    default:
      return 0.0;
  }
}

}  // namespace debias
