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

#include "debias/quadrature.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace debias {

bool QuadratureResult::Converged(double rel_tol) const {
  return std::isfinite(value) &&
         error <= 10.0 * rel_tol * std::max(l1_norm, 1e-300) + 1e-300;
}

namespace {

constexpr int kMaxIntervals = 4000;
constexpr double kMinRelativeWidth = 1e-15;

struct Piece {
  double a, b, value, error, l1;
  bool operator<(const Piece& o) const { return error < o.error; }
};

Piece Estimate(const std::function<double(double)>& f, double a, double b) {
  Piece p{a, b, 0.0, 0.0, 0.0};
  p.value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, a, b, /*max_depth=*/0, /*tol=*/0.0, &p.error, &p.l1);
  return p;
}

}  // namespace

QuadratureResult AdaptiveIntegrate(const std::function<double(double)>& f,
                                   double a, double b, double rel_tol) {
  QuadratureResult out{0.0, 0.0, 0.0};
  if (a == b) return out;
  std::function<double(double)> g = f;
  double lo = a, hi = b;
  if (std::isinf(b)) {
    // x = a + t / (1 - t) maps [0, 1) onto [a, inf).
    g = [&f, a](double t) {
      const double s = 1.0 - t;
      const double x = a + t / s;
      if (!std::isfinite(x)) return 0.0;
      return f(x) / (s * s);
    };
    lo = 0.0;
    hi = 1.0;
  }

  // Global adaptive bisection: always split the piece with the largest error.
  std::priority_queue<Piece> pieces;
  pieces.push(Estimate(g, lo, hi));
  double value = pieces.top().value, error = pieces.top().error;
  double l1 = pieces.top().l1;
  while (static_cast<int>(pieces.size()) < kMaxIntervals &&
         !(error <= rel_tol * l1)) {
    const Piece worst = pieces.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(worst.b - worst.a > kMinRelativeWidth * (hi - lo))) break;
    pieces.pop();
    const Piece left = Estimate(g, worst.a, mid);
    const Piece right = Estimate(g, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    l1 += left.l1 + right.l1 - worst.l1;
    pieces.push(left);
    pieces.push(right);
  }
  // Re-sum to drop the drift of the running updates.
  value = error = l1 = 0.0;
  for (; !pieces.empty(); pieces.pop()) {
    value += pieces.top().value;
    error += pieces.top().error;
    l1 += pieces.top().l1;
  }
  out.value = value;
  out.error = error;
  out.l1_norm = l1;
  return out;
}

}  // namespace debias
