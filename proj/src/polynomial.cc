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

#include "debias/polynomial.h"

#include <algorithm>
#include <cmath>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"

namespace debias {

Polynomial Polynomial::Monomial(int degree, double coefficient) {
  std::vector<double> coeffs(static_cast<size_t>(std::max(degree, 0)) + 1, 0.0);
  coeffs[std::max(degree, 0)] = coefficient;
  return Polynomial(std::move(coeffs));
}

int Polynomial::Degree() const {
  for (int i = static_cast<int>(coeffs_.size()) - 1; i >= 0; --i) {
    if (coeffs_[i] != 0.0) return i;
  }
  return -1;
}

double Polynomial::Evaluate(double x) const {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
    acc = acc * x + *it;
  }
  return acc;
}

Polynomial Polynomial::Derivative(int order) const {
  if (order <= 0) return *this;
  const int n = static_cast<int>(coeffs_.size());
  if (n <= order) return Polynomial({0.0});
  std::vector<double> out(n - order);
  for (int i = order; i < n; ++i) {
    // i! / (i - order)!
    double falling = 1.0;
    for (int j = 0; j < order; ++j) falling *= static_cast<double>(i - j);
    out[i - order] = falling * coeffs_[i];
  }
  return Polynomial(std::move(out));
}

Polynomial Polynomial::Rescaled(double origin, double scale) const {
  // Horner in polynomial arithmetic: acc <- acc * (origin + scale u) + c_i.
  std::vector<double> acc;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
    std::vector<double> next(acc.size() + 1, 0.0);
    for (size_t j = 0; j < acc.size(); ++j) {
      next[j] += origin * acc[j];
      next[j + 1] += scale * acc[j];
    }
    next[0] += *it;
    acc = std::move(next);
  }
  if (acc.empty()) acc.push_back(0.0);
  return Polynomial(std::move(acc));
}

std::string Polynomial::DebugString() const {
  return absl::StrCat("[", absl::StrJoin(coeffs_, ", "), "]");
}

double Binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double result = 1.0;
  for (int i = 1; i <= k; ++i) {
    result = result * static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  return std::round(result);
}

}  // namespace debias
