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

#ifndef DEBIAS_QUADRATURE_H_
#define DEBIAS_QUADRATURE_H_

#include <functional>

namespace debias {

struct QuadratureResult {
  double value;
  // Error estimate reported by the adaptive rule.
  double error;
  // |integrand| integral; used to judge the error relative to cancellation.
  double l1_norm;

  bool Converged(double rel_tol) const;
};

// Globally adaptive 31-point Gauss-Kronrod on [a, b]: the piece with the
// largest error estimate is bisected until the summed error is at most
// rel_tol times the integral of |f|, 4000 pieces exist, or the worst piece is
// narrower than 1e-15 of the range. b may be +infinity, handled by the substitution x = a + t / (1 - t).
QuadratureResult AdaptiveIntegrate(const std::function<double(double)>& f,
                                   double a, double b, double rel_tol = 1e-12);

}  // namespace debias

#endif  // DEBIAS_QUADRATURE_H_
