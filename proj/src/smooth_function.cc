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

#include "debias/smooth_function.h"

#include <cmath>
#include <limits>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "debias/format.h"

namespace debias {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool IsPositiveInteger(double v) { return v >= 1.0 && std::floor(v) == v; }

}  // namespace

SmoothFunction::SmoothFunction(FunctionKind kind, std::string name,
                               std::vector<double> params,
                               std::optional<double> domain_lower,
                               bool polynomial_growth,
                               bool twice_differentiable)
    : kind_(kind),
      name_(std::move(name)),
      params_(std::move(params)),
      domain_lower_(domain_lower),
      polynomial_growth_(polynomial_growth),
      twice_differentiable_(twice_differentiable) {}

SmoothFunction SmoothFunction::Power(int k) {
  SmoothFunction f(FunctionKind::kPower, "power", {static_cast<double>(k)},
                   -kInf, true, true);
  f.poly_ = Polynomial::Monomial(k);
  f.poly_d1_ = f.poly_.Derivative(1);
  f.poly_d2_ = f.poly_.Derivative(2);
  return f;
}

SmoothFunction SmoothFunction::Inverse() {
  return SmoothFunction(FunctionKind::kInverse, "inverse", {}, std::nullopt,
                        false, false);
}

SmoothFunction SmoothFunction::KthRoot(int k) {
  return SmoothFunction(FunctionKind::kKthRoot, "kth_root",
                        {static_cast<double>(k)}, 0.0, true, k == 1);
}

SmoothFunction SmoothFunction::Abs() {
  return SmoothFunction(FunctionKind::kAbs, "abs", {}, -kInf, true, false);
}

SmoothFunction SmoothFunction::Cos(double frequency) {
  return SmoothFunction(FunctionKind::kCos, "cos", {frequency}, -kInf, true,
                        true);
}

SmoothFunction SmoothFunction::Identity(double slope) {
  SmoothFunction f(FunctionKind::kIdentity, "identity", {slope}, -kInf, true,
                   true);
  f.poly_ = Polynomial({0.0, slope});
  f.poly_d1_ = f.poly_.Derivative(1);
  f.poly_d2_ = f.poly_.Derivative(2);
  return f;
}

SmoothFunction SmoothFunction::FromPolynomial(Polynomial p) {
  SmoothFunction f(FunctionKind::kPolynomial, "poly", p.coeffs(), -kInf, true,
                   true);
  f.poly_ = std::move(p);
  f.poly_d1_ = f.poly_.Derivative(1);
  f.poly_d2_ = f.poly_.Derivative(2);
  return f;
}

absl::StatusOr<SmoothFunction> SmoothFunction::Builtin(
    absl::string_view name, std::span<const double> params) {
  auto expect_params = [&](size_t lo, size_t hi) -> absl::Status {
    if (params.size() < lo || params.size() > hi) {
      return absl::InvalidArgumentError(
          absl::StrCat("function '", name, "' takes between ", lo, " and ", hi,
                       " parameters, got ", params.size()));
    }
    return absl::OkStatus();
  };
  if (name == "power") {
    if (auto s = expect_params(1, 1); !s.ok()) return s;
    if (!IsPositiveInteger(params[0])) {
      return absl::InvalidArgumentError("power(k) needs an integer k >= 1");
    }
    return Power(static_cast<int>(params[0]));
  }
  if (name == "kth_root") {
    if (auto s = expect_params(1, 1); !s.ok()) return s;
    if (!IsPositiveInteger(params[0])) {
      return absl::InvalidArgumentError("kth_root(k) needs an integer k >= 1");
    }
    return KthRoot(static_cast<int>(params[0]));
  }
  if (name == "inverse") {
    if (auto s = expect_params(0, 0); !s.ok()) return s;
    return Inverse();
  }
  if (name == "abs") {
    if (auto s = expect_params(0, 0); !s.ok()) return s;
    return Abs();
  }
  if (name == "cos") {
    if (auto s = expect_params(1, 1); !s.ok()) return s;
    if (!std::isfinite(params[0])) {
      return absl::InvalidArgumentError("cos(u) needs a finite frequency");
    }
    return Cos(params[0]);
  }
  if (name == "identity") {
    if (auto s = expect_params(0, 1); !s.ok()) return s;
    return Identity(params.empty() ? 1.0 : params[0]);
  }
  if (name == "poly") {
    if (auto s = expect_params(1, 64); !s.ok()) return s;
    return FromPolynomial(Polynomial({params.begin(), params.end()}));
  }
  return absl::InvalidArgumentError(absl::StrCat("unknown function '", name,
                                                 "'"));
}

absl::StatusOr<SmoothFunction> SmoothFunction::Parse(absl::string_view spec) {
  std::vector<absl::string_view> parts = absl::StrSplit(spec, absl::MaxSplits(':', 1));
  std::vector<double> params;
  if (parts.size() == 2 && !parts[1].empty()) {
    for (absl::string_view token : absl::StrSplit(parts[1], ',')) {
      double v;
      if (!absl::SimpleAtod(token, &v)) {
        return absl::InvalidArgumentError(
            absl::StrCat("bad parameter '", token, "' in '", spec, "'"));
      }
      params.push_back(v);
    }
  }
  return Builtin(parts[0], params);
}

double SmoothFunction::Value(double x) const {
  switch (kind_) {
    case FunctionKind::kPower:
    case FunctionKind::kIdentity:
    case FunctionKind::kPolynomial:
      return poly_.Evaluate(x);
    case FunctionKind::kInverse:
      return 1.0 / x;
    case FunctionKind::kKthRoot:
      return std::pow(x, 1.0 / params_[0]);
    case FunctionKind::kAbs:
      return std::abs(x);
    case FunctionKind::kCos:
      return std::cos(params_[0] * x);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double SmoothFunction::FirstDerivative(double x) const {
  switch (kind_) {
    case FunctionKind::kPower:
    case FunctionKind::kIdentity:
    case FunctionKind::kPolynomial:
      return poly_d1_.Evaluate(x);
    case FunctionKind::kInverse:
      return -1.0 / (x * x);
    case FunctionKind::kKthRoot: {
      const double r = 1.0 / params_[0];
      return r * std::pow(x, r - 1.0);
    }
    case FunctionKind::kAbs:
      return x > 0 ? 1.0 : -1.0;
    case FunctionKind::kCos:
      return -params_[0] * std::sin(params_[0] * x);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double SmoothFunction::SecondDerivative(double x) const {
  switch (kind_) {
    case FunctionKind::kPower:
    case FunctionKind::kIdentity:
    case FunctionKind::kPolynomial:
      return poly_d2_.Evaluate(x);
    case FunctionKind::kInverse:
      return 2.0 / (x * x * x);
    case FunctionKind::kKthRoot: {
      const double r = 1.0 / params_[0];
      if (params_[0] == 1.0) return 0.0;
      return r * (r - 1.0) * std::pow(x, r - 2.0);
    }
    case FunctionKind::kAbs:
      // Classical second derivative away from the kink.
      return 0.0;
    case FunctionKind::kCos:
      return -params_[0] * params_[0] * std::cos(params_[0] * x);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

bool SmoothFunction::TwiceDifferentiableFrom(double lower) const {
  if (!std::isfinite(lower)) return twice_differentiable_;
  switch (kind_) {
    case FunctionKind::kInverse:
      return lower > 0.0;
    case FunctionKind::kKthRoot:
      return params_[0] == 1.0 ? lower >= 0.0 : lower > 0.0;
    case FunctionKind::kAbs:
      return lower > 0.0;
    default:
      return true;
  }
}

std::optional<Polynomial> SmoothFunction::AsPolynomial() const {
  switch (kind_) {
    case FunctionKind::kPower:
    case FunctionKind::kIdentity:
    case FunctionKind::kPolynomial:
      return poly_;
    case FunctionKind::kKthRoot:
      if (params_[0] == 1.0) return Polynomial({0.0, 1.0});
      return std::nullopt;
    default:
      return std::nullopt;
  }
}

std::string SmoothFunction::Spec() const {
  if (params_.empty()) return name_;
  return absl::StrCat(
      name_, ":",
      absl::StrJoin(params_, ",", [](std::string* out, double v) {
        out->append(FormatDouble(v));
      }));
}

}  // namespace debias
