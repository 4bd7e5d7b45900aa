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

#ifndef DEBIAS_SMOOTH_FUNCTION_H_
#define DEBIAS_SMOOTH_FUNCTION_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "debias/polynomial.h"

namespace debias {

enum class FunctionKind {
  kPower,
  kInverse,
  kKthRoot,
  kAbs,
  kCos,
  kIdentity,
  kPolynomial,
};

// An evaluable target function f together with exact f' and f''.
//
// The catalogue is deliberately small: power(k), inverse, kth_root(k), abs,
// cos(u), identity(c), plus raw polynomials. Instances are immutable.
//
// domain_lower() is -inf for functions defined on the whole line, 0 for
// kth_root, and unset for inverse (the caller supplies a lower bound L > 0).
// twice_differentiable() refers to the function's whole domain; abs and
// inverse report false.
class SmoothFunction {
 public:
  // Builds a catalogue function. Names: power, inverse, kth_root, abs, cos,
  // identity, poly. `params` holds k for power and kth_root (integer >= 1),
  // the frequency u for cos, the optional slope c for identity and the
  // coefficients for poly.
  static absl::StatusOr<SmoothFunction> Builtin(absl::string_view name,
                                                std::span<const double> params);

  // Parses the compact CLI spelling "name[:p1[,p2...]]", e.g. "power:3",
  // "cos:0.5", "inverse", "poly:1,0,2".
  static absl::StatusOr<SmoothFunction> Parse(absl::string_view spec);

  static SmoothFunction Power(int k);
  static SmoothFunction Inverse();
  static SmoothFunction KthRoot(int k);
  static SmoothFunction Abs();
  static SmoothFunction Cos(double frequency);
  static SmoothFunction Identity(double slope = 1.0);
  static SmoothFunction FromPolynomial(Polynomial p);

  double Value(double x) const;
  double FirstDerivative(double x) const;
  double SecondDerivative(double x) const;

  FunctionKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  const std::vector<double>& params() const { return params_; }
  std::optional<double> domain_lower() const { return domain_lower_; }
  bool polynomial_growth() const { return polynomial_growth_; }
  bool twice_differentiable() const { return twice_differentiable_; }

  // True when f is finite and twice differentiable on [lower, inf).
  bool TwiceDifferentiableFrom(double lower) const;

  // The function as an explicit polynomial, when it is one.
  std::optional<Polynomial> AsPolynomial() const;

  // Round-trips through Parse().
  std::string Spec() const;

 private:
  SmoothFunction(FunctionKind kind, std::string name, std::vector<double> params,
                 std::optional<double> domain_lower, bool polynomial_growth,
                 bool twice_differentiable);

  FunctionKind kind_;
  std::string name_;
  std::vector<double> params_;
  std::optional<double> domain_lower_;
  bool polynomial_growth_;
  bool twice_differentiable_;
  // Set for the polynomial kinds (power, identity, poly).
  Polynomial poly_;
  Polynomial poly_d1_;
  Polynomial poly_d2_;
};

}  // namespace debias

#endif  // DEBIAS_SMOOTH_FUNCTION_H_
