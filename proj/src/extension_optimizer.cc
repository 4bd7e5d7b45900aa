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

#include "debias/extension_optimizer.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "debias/format.h"
#include "debias/quadrature.h"

namespace debias {
namespace {

// Relative tolerance for prior integrals involving f(q).
constexpr double kPriorQuadratureTol = 1e-10;
// Relative tolerance for the right-region integrals of the estimator.
constexpr double kRightQuadratureTol = 1e-12;

absl::StatusOr<double> ParseNumber(absl::string_view token) {
  double v;
  if (!absl::SimpleAtod(token, &v) || !std::isfinite(v)) {
    return absl::InvalidArgumentError(absl::StrCat("bad number '", token, "'"));
  }
  return v;
}

// Coefficients of Lag_i(t) = sum_m (-1)^m C(i, m) t^m / m!.
double LaguerreMonomialCoeff(int i, int m) {
  double inv_fact = 1.0;
  for (int j = 2; j <= m; ++j) inv_fact /= j;
  return ((m % 2) ? -1.0 : 1.0) * Binomial(i, m) * inv_fact;
}

// Row j of the constraint matrix: d^j/dt^j of h = sum_l D^{2l} Lag_i at t=0,
// i.e. (-1)^j sum_{m >= j, m = j mod 2} C(i, m).
double ConstraintEntry(int j, int i) {
  double sum = 0.0;
  for (int m = j; m <= i; m += 2) sum += Binomial(i, m);
  return (j % 2) ? -sum : sum;
}

// Values Lag_0(t)..Lag_k(t) by the three-term recurrence.
void LaguerreValues(double t, int k, double* out) {
  out[0] = 1.0;
  if (k >= 1) out[1] = 1.0 - t;
  for (int i = 1; i < k; ++i) {
    out[i + 1] = ((2 * i + 1 - t) * out[i] - i * out[i - 1]) / (i + 1);
  }
}

// Mean of an integrand against the right-region Laplace density:
// \int_L^inf phi(x) (1/2b) e^{-|x-q|/b} dx for q >= L.
absl::StatusOr<double> RightRegionIntegral(
    const std::function<double(double)>& phi, double lower, double b,
    double q) {
  // x = q - b s on [L, q] and x = q + b s on [q, inf).
  auto below = [&](double s) { return 0.5 * phi(q - b * s) * std::exp(-s); };
  auto above = [&](double s) { return 0.5 * phi(q + b * s) * std::exp(-s); };
  const QuadratureResult lo =
      AdaptiveIntegrate(below, 0.0, (q - lower) / b, kRightQuadratureTol);
  const QuadratureResult hi = AdaptiveIntegrate(
      above, 0.0, std::numeric_limits<double>::infinity(), kRightQuadratureTol);
  for (const QuadratureResult* r : {&lo, &hi}) {
    if (!r->Converged(1e-9)) {
      return absl::InternalError(absl::StrCat(
          "right-region quadrature did not converge: value ", r->value,
          ", error estimate ", r->error));
    }
  }
  return lo.value + hi.value;
}

absl::StatusOr<double> PriorExpectation(const PriorMeasure& prior,
                                        const std::function<double(double)>& fn) {
  if (!prior.is_uniform()) {
    double sum = 0.0;
    for (const auto& atom : prior.atoms()) sum += atom.weight * fn(atom.q);
    return sum;
  }
  const QuadratureResult r =
      AdaptiveIntegrate(fn, prior.lo(), prior.hi(), kPriorQuadratureTol);
  if (!r.Converged(kPriorQuadratureTol)) {
    return absl::InternalError(absl::StrCat(
        "prior quadrature did not converge: error estimate ", r.error));
  }
  return r.value / (prior.hi() - prior.lo());
}

}  // namespace

// ---------------------------------------------------------------------------
// PriorMeasure

absl::StatusOr<PriorMeasure> PriorMeasure::Discrete(std::vector<Atom> atoms) {
  if (atoms.empty()) {
    return absl::InvalidArgumentError("discrete prior needs at least one atom");
  }
  double total = 0.0;
  for (const auto& a : atoms) {
    if (!std::isfinite(a.q) || !(a.weight > 0.0) || !std::isfinite(a.weight)) {
      return absl::InvalidArgumentError(
          "prior atoms need finite locations and positive weights");
    }
    total += a.weight;
  }
  PriorMeasure p;
  p.atoms_min_ = atoms.front().q;
  for (auto& a : atoms) {
    a.weight /= total;
    p.atoms_min_ = std::min(p.atoms_min_, a.q);
  }
  p.atoms_ = std::move(atoms);
  return p;
}

absl::StatusOr<PriorMeasure> PriorMeasure::Uniform(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo)) {
    return absl::InvalidArgumentError("uniform prior needs finite lo < hi");
  }
  PriorMeasure p;
  p.uniform_ = true;
  p.lo_ = lo;
  p.hi_ = hi;
  return p;
}

absl::StatusOr<PriorMeasure> PriorMeasure::Parse(absl::string_view spec) {
  std::vector<absl::string_view> parts = absl::StrSplit(spec, ':');
  if (parts[0] == "uniform" && parts.size() == 3) {
    auto lo = ParseNumber(parts[1]);
    auto hi = ParseNumber(parts[2]);
    if (!lo.ok()) return lo.status();
    if (!hi.ok()) return hi.status();
    return Uniform(*lo, *hi);
  }
  if (parts[0] == "point" && parts.size() == 2) {
    auto q = ParseNumber(parts[1]);
    if (!q.ok()) return q.status();
    return PointMass(*q);
  }
  if (parts[0] == "discrete" && parts.size() == 2) {
    std::vector<Atom> atoms;
    for (absl::string_view item : absl::StrSplit(parts[1], ',')) {
      std::vector<absl::string_view> qw = absl::StrSplit(item, '@');
      auto q = ParseNumber(qw[0]);
      if (!q.ok()) return q.status();
      double w = 1.0;
      if (qw.size() == 2) {
        auto parsed = ParseNumber(qw[1]);
        if (!parsed.ok()) return parsed.status();
        w = *parsed;
      }
      atoms.push_back({*q, w});
    }
    return Discrete(std::move(atoms));
  }
  return absl::InvalidArgumentError(absl::StrCat(
      "bad prior '", spec,
      "'; expected uniform:LO:HI, point:Q or discrete:Q1@W1,Q2@W2"));
}

std::string PriorMeasure::Spec() const {
  if (uniform_) {
    return absl::StrCat("uniform:", FormatDouble(lo_), ":", FormatDouble(hi_));
  }
  return absl::StrCat(
      "discrete:",
      absl::StrJoin(atoms_, ",", [](std::string* out, const Atom& a) {
        absl::StrAppend(out, FormatDouble(a.q), "@", FormatDouble(a.weight));
      }));
}

// ---------------------------------------------------------------------------
// Problem setup

absl::StatusOr<ExtensionProblem> ExtensionProblem::Create(
    SmoothFunction f, double lower_bound, int degree, double noise_scale,
    PriorMeasure prior) {
  if (!std::isfinite(lower_bound)) {
    return absl::InvalidArgumentError("lower bound L must be finite");
  }
  if (degree < 2 || degree > kMaxExtensionDegree) {
    return absl::InvalidArgumentError(absl::StrCat(
        "extension degree k must be in [2, ", kMaxExtensionDegree, "], got ",
        degree));
  }
  if (!(noise_scale > 0.0) || !std::isfinite(noise_scale)) {
    return absl::InvalidArgumentError("noise scale b must be positive");
  }
  if (!f.TwiceDifferentiableFrom(lower_bound)) {
    return absl::InvalidArgumentError(
        absl::StrCat("'", f.Spec(), "' is not twice differentiable on [",
                     FormatDouble(lower_bound), ", inf)"));
  }
  if (prior.SupportMin() < lower_bound) {
    return absl::InvalidArgumentError(
        absl::StrCat("prior support starts at ", FormatDouble(prior.SupportMin()),
                     ", below the lower bound L = ", FormatDouble(lower_bound)));
  }
  return ExtensionProblem{std::move(f), lower_bound, degree, noise_scale,
                          std::move(prior)};
}

absl::StatusOr<PriorWeights> ComputePriorWeights(const ExtensionProblem& p) {
  const double lower = p.lower_bound;
  const double b = p.noise_scale;
  const SmoothFunction& f = p.f;
  PriorWeights out{};
  if (p.prior.is_uniform()) {
    const double lo = p.prior.lo(), hi = p.prior.hi();
    out.w = b * (std::exp((lower - lo) / b) - std::exp((lower - hi) / b)) /
            (hi - lo);
  } else {
    auto w = PriorExpectation(p.prior,
                              [&](double q) { return std::exp((lower - q) / b); });
    if (!w.ok()) return w.status();
    out.w = *w;
  }
  auto wf = PriorExpectation(p.prior, [&](double q) {
    return f.Value(q) * std::exp((lower - q) / b);
  });
  if (!wf.ok()) return wf.status();
  auto wff = PriorExpectation(p.prior, [&](double q) {
    const double v = f.Value(q);
    return v * v * std::exp((lower - q) / b);
  });
  if (!wff.ok()) return wff.status();
  out.w_f = *wf;
  out.w_ff = *wff;
  return out;
}

double TailMoment(int m, double lower_bound, double b) {
  double moment = b;
  double power = 1.0;
  for (int i = 1; i <= m; ++i) {
    power *= lower_bound;
    moment = b * power - i * b * moment;
  }
  return moment;
}

// ---------------------------------------------------------------------------
// Reduced QP

// Both evaluate the factored form w (|z|^2 + |y_head|^2) rather than z'Qz:
// Q has condition ~4^k and the product form cancels badly. Sums run in long
// double.
double ReducedQp::Objective(const Eigen::VectorXd& z) const {
  const Eigen::VectorXd y = FullCoefficients(z);
  long double sq = 0.0L;
  for (int i = 0; i < y.size(); ++i) {
    sq += static_cast<long double>(y(i)) * y(i);
  }
  const long double w = weights.w;
  return static_cast<double>(
      0.5L * (w * sq - 2.0L * weights.w_f * y(0) + weights.w_ff));
}

Eigen::VectorXd ReducedQp::Gradient(const Eigen::VectorXd& z) const {
  const int n = static_cast<int>(z.size());
  // Residual of the head coefficients against the unconstrained optimum
  // y_0 = w_f / w, y_1 = y_2 = 0, scaled by w.
  long double head[3];
  for (int j = 0; j < 3; ++j) {
    long double v = offset(j);
    for (int i = 0; i < n; ++i) v += static_cast<long double>(map(j, i)) * z(i);
    head[j] = weights.w * v;
  }
  head[0] -= weights.w_f;
  Eigen::VectorXd g(n);
  for (int i = 0; i < n; ++i) {
    long double v = static_cast<long double>(weights.w) * z(i);
    for (int j = 0; j < 3; ++j) v += static_cast<long double>(map(j, i)) * head[j];
    g(i) = static_cast<double>(v);
  }
  return g;
}

Eigen::VectorXd ReducedQp::FullCoefficients(const Eigen::VectorXd& z) const {
  Eigen::VectorXd y(3 + z.size());
  y.head<3>() = offset + map * z;
  y.tail(z.size()) = z;
  return y;
}

absl::StatusOr<ReducedQp> BuildReducedQp(const ExtensionProblem& p) {
  if (p.degree < 2) return absl::InvalidArgumentError("k must be >= 2");
  if (p.prior.SupportMin() < p.lower_bound) {
    return absl::InvalidArgumentError("prior support lies below L");
  }
  auto weights = ComputePriorWeights(p);
  if (!weights.ok()) return weights.status();

  const int k = p.degree;
  const int free = k - 2;
  const double lower = p.lower_bound;
  const double b = p.noise_scale;

  // Targets for h, h_t, h_tt at t = 0; d/dx = -(1/b) d/dt.
  const Eigen::Vector3d target(p.f.Value(lower), -b * p.f.FirstDerivative(lower),
                               b * b * p.f.SecondDerivative(lower));
  Eigen::Matrix3d head;
  Eigen::MatrixXd tail(3, free);
  for (int j = 0; j < 3; ++j) {
    for (int i = 0; i < 3; ++i) head(j, i) = ConstraintEntry(j, i);
    for (int i = 0; i < free; ++i) tail(j, i) = ConstraintEntry(j, i + 3);
  }
  const auto lu = head.partialPivLu();

  ReducedQp qp;
  qp.weights = *weights;
  qp.offset = lu.solve(target);
  qp.map = -lu.solve(tail);

  const double w = weights->w;
  qp.q = w * (Eigen::MatrixXd::Identity(free, free) + qp.map.transpose() * qp.map);
  qp.c = w * qp.map.transpose() * qp.offset -
         weights->w_f * qp.map.row(0).transpose();
  qp.const_term = 0.5 * (w * qp.offset.squaredNorm() -
                         2.0 * weights->w_f * qp.offset(0) + weights->w_ff);
  return qp;
}

// ---------------------------------------------------------------------------
// Solve

absl::StatusOr<ExtensionSolution> Solve(const ExtensionProblem& p) {
  auto qp_or = BuildReducedQp(p);
  if (!qp_or.ok()) return qp_or.status();
  const ReducedQp& qp = *qp_or;
  const int k = p.degree;
  const int free = qp.num_free();

  ExtensionSolution sol(p);
  const Eigen::VectorXd start = Eigen::VectorXd::Zero(free);
  sol.taylor_objective_ = qp.Objective(start);

  // Newton step from the Taylor point: z = -Q^{-1} (grad at 0). Q = w (I +
  // M'M) with M = qp.map of rank <= 3, so the inverse is applied through
  // (I + M'M)^{-1} = I - M' (I_3 + M M')^{-1} M.
  const double w = qp.weights.w;
  const Eigen::Matrix3d small =
      Eigen::Matrix3d::Identity() + qp.map * qp.map.transpose();
  const auto small_lu = small.partialPivLu();
  Eigen::VectorXd z(free);
  if (free > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(qp.q, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    sol.q_condition_ = lo > 0 ? hi / lo : std::numeric_limits<double>::infinity();
  }
  if (w >= std::numeric_limits<double>::min() && std::isfinite(w)) {
    const Eigen::VectorXd grad = qp.Gradient(start);
    const Eigen::VectorXd scaled = grad / w;
    auto newton = [&](const Eigen::VectorXd& s) -> Eigen::VectorXd {
      return s - qp.map.transpose() * small_lu.solve(qp.map * s);
    };
    z = -newton(scaled);
    // One refinement pass with the extended-precision gradient.
    z -= newton(qp.Gradient(z) / w);
  } else {
    // The prior sits so far above L that w underflows. The minimizer does not
    // depend on the prior, so return the least-norm solution of the
    // constraints directly.
    z = -qp.map.transpose() * small_lu.solve(qp.offset);
    sol.used_fallback_ = true;
  }

  sol.free_ = z;
  sol.laguerre_ = qp.FullCoefficients(z);
  sol.objective_ = qp.Objective(z);
  sol.grad_norm_ = free > 0 ? qp.Gradient(z).lpNorm<Eigen::Infinity>() : 0.0;

  // Monomials in t, then h = sum_l D_t^{2l} g, then back to raw x.
  std::vector<double> gt(k + 1, 0.0);
  for (int i = 0; i <= k; ++i) {
    for (int m = 0; m <= i; ++m) {
      gt[m] += sol.laguerre_(i) * LaguerreMonomialCoeff(i, m);
    }
  }
  std::vector<double> ht(k + 1, 0.0);
  for (int m = k; m >= 0; --m) {
    ht[m] = gt[m] + (m + 2 <= k ? (m + 2.0) * (m + 1.0) * ht[m + 2] : 0.0);
  }
  const double lower = p.lower_bound;
  const double b = p.noise_scale;
  sol.g_scaled_ = Polynomial(gt);
  sol.h_scaled_ = Polynomial(ht);
  // t = L/b - x/b.
  sol.g_ = sol.g_scaled_.Rescaled(lower / b, -1.0 / b);
  sol.h_ = sol.h_scaled_.Rescaled(lower / b, -1.0 / b);
  return sol;
}

double ExtensionSolution::EvaluateLeft(double x) const {
  const int k = problem_.degree;
  const double t = (problem_.lower_bound - x) / problem_.noise_scale;
  double values[kMaxExtensionDegree + 1];
  LaguerreValues(t, k, values);
  double sum = 0.0;
  for (int i = k; i >= 0; --i) sum += laguerre_(i) * values[i];
  return sum;
}

double ExtensionSolution::EvaluateExtension(double x) const {
  return h_scaled_.Evaluate((problem_.lower_bound - x) / problem_.noise_scale);
}

double ExtensionSolution::Estimate(double x) const {
  if (x < problem_.lower_bound) return EvaluateLeft(x);
  const double b = problem_.noise_scale;
  return problem_.f.Value(x) - b * b * problem_.f.SecondDerivative(x);
}

// ---------------------------------------------------------------------------
// Moments of the estimator

namespace {

struct EstimatorMoments {
  double first;
  double second;
};

absl::StatusOr<EstimatorMoments> ComputeMoments(const ExtensionSolution& sol,
                                                double q) {
  const ExtensionProblem& p = sol.problem();
  if (!(q >= p.lower_bound)) {
    return absl::InvalidArgumentError(
        absl::StrCat("q = ", FormatDouble(q), " is below L = ",
                     FormatDouble(p.lower_bound)));
  }
  const double b = p.noise_scale;
  // Left region: (1/2b) e^{(L-q)/b} \int_{-inf}^L g(x)^m e^{(x-L)/b} dx, which
  // by orthonormality is (1/2) e^{(L-q)/b} y_0 for m = 1 and
  // (1/2) e^{(L-q)/b} |y|^2 for m = 2.
  const double tail_mass = 0.5 * std::exp((p.lower_bound - q) / b);
  const double left1 = tail_mass * sol.laguerre()(0);
  const double left2 = tail_mass * sol.laguerre().squaredNorm();

  const SmoothFunction& f = p.f;
  auto right_value = [&](double x) {
    return f.Value(x) - b * b * f.SecondDerivative(x);
  };
  auto right1 = RightRegionIntegral(right_value, p.lower_bound, b, q);
  if (!right1.ok()) return right1.status();
  auto right2 = RightRegionIntegral(
      [&](double x) {
        const double v = right_value(x);
        return v * v;
      },
      p.lower_bound, b, q);
  if (!right2.ok()) return right2.status();
  return EstimatorMoments{left1 + *right1, left2 + *right2};
}

}  // namespace

absl::StatusOr<double> EstimatorExpectation(const ExtensionSolution& sol,
                                            double q) {
  auto m = ComputeMoments(sol, q);
  if (!m.ok()) return m.status();
  return m->first;
}

absl::StatusOr<double> EstimatorVariance(const ExtensionSolution& sol,
                                         double q) {
  auto m = ComputeMoments(sol, q);
  if (!m.ok()) return m.status();
  return std::max(m->second - m->first * m->first, 0.0);
}

absl::StatusOr<double> EvaluateObjective(const ExtensionProblem& p,
                                         const Polynomial& g) {
  auto weights = ComputePriorWeights(p);
  if (!weights.ok()) return weights.status();
  const double lower = p.lower_bound;
  const double b = p.noise_scale;
  const auto& a = g.coeffs();
  const int n = static_cast<int>(a.size());
  std::vector<double> moments(std::max(2 * n - 1, 1));
  for (size_t m = 0; m < moments.size(); ++m) {
    moments[m] = TailMoment(static_cast<int>(m), lower, b);
  }
  double first = 0.0, second = 0.0;
  for (int i = 0; i < n; ++i) {
    first += a[i] * moments[i];
    for (int j = 0; j < n; ++j) second += a[i] * a[j] * moments[i + j];
  }
  // (1/2b) \int_{-inf}^L (w g^2 - 2 w_f g + w_ff) e^{(x-L)/b} dx.
  return (weights->w * second - 2.0 * weights->w_f * first +
          weights->w_ff * b) /
         (2.0 * b);
}

Polynomial EstimatorFromExtension(const Polynomial& h, double b) {
  const auto& hc = h.coeffs();
  const int n = static_cast<int>(hc.size());
  std::vector<double> g(std::max(n, 1), 0.0);
  for (int i = 0; i < n; ++i) {
    g[i] = hc[i] - (i + 2 < n ? b * b * (i + 2.0) * (i + 1.0) * hc[i + 2] : 0.0);
  }
  return Polynomial(std::move(g));
}

Polynomial ExtensionFromEstimator(const Polynomial& g, double b) {
  const auto& gc = g.coeffs();
  const int n = static_cast<int>(gc.size());
  std::vector<double> h(std::max(n, 1), 0.0);
  for (int i = n - 1; i >= 0; --i) {
    h[i] = gc[i] + (i + 2 < n ? b * b * (i + 2.0) * (i + 1.0) * h[i + 2] : 0.0);
  }
  return Polynomial(std::move(h));
}

std::array<double, 3> ConstraintResiduals(const ExtensionSolution& sol) {
  const ExtensionProblem& p = sol.problem();
  const double lower = p.lower_bound;
  return {sol.h().Evaluate(lower) - p.f.Value(lower),
          sol.h().Derivative(1).Evaluate(lower) - p.f.FirstDerivative(lower),
          sol.h().Derivative(2).Evaluate(lower) - p.f.SecondDerivative(lower)};
}

}  // namespace debias
