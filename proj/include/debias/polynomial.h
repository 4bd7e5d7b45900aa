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

#ifndef DEBIAS_POLYNOMIAL_H_
#define DEBIAS_POLYNOMIAL_H_

#include <string>
#include <vector>

namespace debias {

// Dense univariate polynomial. coeffs()[i] is the coefficient of x^i. An empty
// coefficient vector and a vector of zeros both represent the zero
// polynomial.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {}

  static Polynomial Monomial(int degree, double coefficient = 1.0);

  const std::vector<double>& coeffs() const { return coeffs_; }

  // Highest index with a nonzero coefficient, or -1 for the zero polynomial.
  int Degree() const;
  bool IsZero() const { return Degree() < 0; }

  // Horner evaluation.
  double Evaluate(double x) const;

  // Exact coefficient-shift derivative of the given order (>= 0). Always
  // returns at least one coefficient, so the derivative of a constant is [0].
  Polynomial Derivative(int order = 1) const;

  // Rewrites p(x) as a polynomial in u where x = origin + scale * u.
  Polynomial Rescaled(double origin, double scale) const;

  std::string DebugString() const;

 private:
  std::vector<double> coeffs_;
};

// Free-function spellings used by the CLI and tests.
inline double PolyEval(const Polynomial& p, double x) { return p.Evaluate(x); }
inline Polynomial PolyDerivative(const Polynomial& p, int order) {
  return p.Derivative(order);
}

// Binomial coefficient as a double; exact for the small arguments used here.
double Binomial(int n, int k);

}  // namespace debias

#endif  // DEBIAS_POLYNOMIAL_H_
