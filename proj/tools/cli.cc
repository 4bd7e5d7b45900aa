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

#include "cli.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "absl/strings/string_view.h"
#include "absl/strings/strip.h"
#include "debias/extension_optimizer.h"
#include "debias/format.h"
#include "debias/general_noise.h"
#include "debias/laplace_debias.h"
#include "debias/mean_mechanisms.h"
#include "debias/monte_carlo.h"
#include "debias/noise.h"
#include "debias/prdp.h"
#include "debias/smooth_function.h"
#include "json.hpp"
#include "svg_plot.h"

namespace debias::cli {
namespace {

using json = nlohmann::ordered_json;

constexpr double kConditionWarning = 1e8;
constexpr double kMcCheckZ = 4.0;

// ---------------------------------------------------------------------------
// Parsing helpers. Options that may be absent are bound to strings and parsed
// here, so an unset option is simply an empty string.

absl::StatusOr<double> ParseDouble(absl::string_view flag,
                                   absl::string_view text) {
  double v;
  if (!absl::SimpleAtod(absl::StripAsciiWhitespace(text), &v) ||
      !std::isfinite(v)) {
    return absl::InvalidArgumentError(
        absl::StrCat(flag, ": '", text, "' is not a finite number"));
  }
  return v;
}

absl::StatusOr<std::vector<double>> ParseDoubleList(absl::string_view flag,
                                                    absl::string_view text) {
  std::vector<double> values;
  for (absl::string_view token : absl::StrSplit(text, ',')) {
    auto v = ParseDouble(flag, token);
    if (!v.ok()) return v.status();
    values.push_back(*v);
  }
  return values;
}

absl::StatusOr<int64_t> ParseInt(absl::string_view flag,
                                 absl::string_view text) {
  int64_t v;
  if (!absl::SimpleAtoi(absl::StripAsciiWhitespace(text), &v)) {
    return absl::InvalidArgumentError(
        absl::StrCat(flag, ": '", text, "' is not an integer"));
  }
  return v;
}

// START:END or START:END:STEP, inclusive.
absl::StatusOr<std::vector<int64_t>> ParseIntRange(absl::string_view flag,
                                                   absl::string_view text) {
  std::vector<absl::string_view> parts = absl::StrSplit(text, ':');
  if (parts.size() < 2 || parts.size() > 3) {
    return absl::InvalidArgumentError(
        absl::StrCat(flag, ": expected START:END[:STEP], got '", text, "'"));
  }
  auto start = ParseInt(flag, parts[0]);
  auto end = ParseInt(flag, parts[1]);
  absl::StatusOr<int64_t> step = int64_t{1};
  if (parts.size() == 3) step = ParseInt(flag, parts[2]);
  if (!start.ok()) return start.status();
  if (!end.ok()) return end.status();
  if (!step.ok()) return step.status();
  if (*step <= 0 || *end < *start || *start < 0) {
    return absl::InvalidArgumentError(absl::StrCat(
        flag, ": need 0 <= START <= END and STEP > 0, got '", text, "'"));
  }
  std::vector<int64_t> values;
  for (int64_t n = *start; n <= *end; n += *step) values.push_back(n);
  return values;
}

absl::StatusOr<SmoothFunction> ParseFunction(const std::string& text) {
  // Either the catalogue form "power:3" or {"name": "power", "params": [3]}.
  if (!text.empty() && text.front() == '{') {
    json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object() || !j.contains("name") ||
        !j["name"].is_string()) {
      return absl::InvalidArgumentError(
          absl::StrCat("--function: bad JSON function spec '", text, "'"));
    }
    std::vector<double> params;
    if (j.contains("params")) {
      if (!j["params"].is_array()) {
        return absl::InvalidArgumentError("--function: params must be a list");
      }
      for (const auto& p : j["params"]) {
        if (!p.is_number()) {
          return absl::InvalidArgumentError(
              "--function: params must be numbers");
        }
        params.push_back(p.get<double>());
      }
    }
    return SmoothFunction::Builtin(j["name"].get<std::string>(), params);
  }
  return SmoothFunction::Parse(text);
}

// Shortest round-trip text, with negative zero printed as 0.
std::string Num(double v) { return FormatDouble(v + 0.0); }

std::string NumList(const std::vector<double>& v) {
  std::vector<std::string> parts;
  parts.reserve(v.size());
  for (double x : v) parts.push_back(Num(x));
  return absl::StrCat("[", absl::StrJoin(parts, ", "), "]");
}

json JsonNum(double v) { return std::isfinite(v) ? json(v + 0.0) : json(); }

json JsonList(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(JsonNum(x));
  return a;
}

// ---------------------------------------------------------------------------
// Output.

absl::Status WriteOutput(const std::string& path, const std::string& content,
                         std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
    out.flush();
    return out ? absl::OkStatus()
               : absl::InternalError("failed writing to standard output");
  }
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp.replace_filename(absl::StrCat(".", target.filename().string(), ".tmp"));
  {
    std::ofstream file(tmp, std::ios::binary | std::ios::trunc);
    if (!file) {
      return absl::InvalidArgumentError(
          absl::StrCat("cannot open '", tmp.string(), "' for writing"));
    }
    file << content;
    file.close();
    if (!file) {
      std::error_code ignored;
      fs::remove(tmp, ignored);
      return absl::InternalError(
          absl::StrCat("failed writing '", tmp.string(), "'"));
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    return absl::InternalError(absl::StrCat("cannot rename '", tmp.string(),
                                            "' to '", path, "': ",
                                            ec.message()));
  }
  return absl::OkStatus();
}

// Run metadata embedded in every output: version, command, seed, flags.
struct RunMeta {
  std::string command;
  std::optional<uint64_t> seed;
  std::map<std::string, std::string> args;

  json ToJson() const {
    json j;
    j["version"] = kVersion;
    j["command"] = command;
    j["seed"] = seed ? json(*seed) : json();
    j["args"] = json(args);
    return j;
  }
  std::string CsvComment() const { return "# " + ToJson().dump() + "\n"; }
  std::string SvgComment() const {
    std::string s = ToJson().dump();
    // "--" may not appear inside an XML comment.
    for (size_t i = s.find("--"); i != std::string::npos; i = s.find("--", i)) {
      s.replace(i, 2, "- -");
    }
    return s;
  }
};

std::map<std::string, std::string> CollectArgs(const CLI::App& sub) {
  std::map<std::string, std::string> args;
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name.empty()) continue;
    std::string value;
    if (opt->get_expected_min() == 0) {
      value = opt->count() > 0 ? "true" : "false";
    } else if (opt->count() > 0) {
      value = absl::StrJoin(opt->results(), ",");
    } else {
      value = opt->get_default_str();
    }
    if (!value.empty()) args[name] = value;
  }
  return args;
}

// Uses --seed when given, otherwise draws one and reports it on `err`.
absl::StatusOr<uint64_t> ResolveSeed(const std::string& text,
                                     std::ostream& err) {
  if (!text.empty()) {
    uint64_t v;
    if (!absl::SimpleAtoi(text, &v)) {
      return absl::InvalidArgumentError(
          absl::StrCat("--seed: '", text, "' is not a nonnegative integer"));
    }
    return v;
  }
  std::random_device rd;
  const uint64_t seed = (static_cast<uint64_t>(rd()) << 32) | rd();
  err << "seed: " << seed << "\n";
  return seed;
}

absl::StatusOr<PriorMeasure> PriorOrDefault(const std::string& text,
                                            double lower_bound) {
  if (text.empty()) return PriorMeasure::PointMass(lower_bound);
  return PriorMeasure::Parse(text);
}

absl::StatusOr<ExtensionSolution> SolveExtension(const SmoothFunction& f,
                                                 double lower_bound, int k,
                                                 double b,
                                                 const std::string& prior) {
  auto mu = PriorOrDefault(prior, lower_bound);
  if (!mu.ok()) return mu.status();
  auto problem = ExtensionProblem::Create(f, lower_bound, k, b, *mu);
  if (!problem.ok()) return problem.status();
  return Solve(*problem);
}

// ---------------------------------------------------------------------------
// Subcommands.

struct EstimateFlags {
  std::string function;
  double b = 0;
  double x = 0;
  std::string lower_bound;
  int k = 10;
  std::string prior;
  bool json = false;
};

absl::Status RunEstimate(const EstimateFlags& flags, const RunMeta& meta,
                         std::ostream& out) {
  auto f = ParseFunction(flags.function);
  if (!f.ok()) return f.status();
  double value;
  std::string route;
  if (!flags.lower_bound.empty()) {
    auto lower = ParseDouble("--L", flags.lower_bound);
    if (!lower.ok()) return lower.status();
    auto sol = SolveExtension(*f, *lower, flags.k, flags.b, flags.prior);
    if (!sol.ok()) return sol.status();
    value = sol->Estimate(flags.x);
    route = "extension";
  } else {
    auto g = LaplaceEstimator::Create(*f, flags.b);
    if (!g.ok()) return g.status();
    value = f->kind() == FunctionKind::kPower
                ? PowerEstimate(static_cast<int>(f->params()[0]), flags.b,
                                flags.x)
                : g->Estimate(flags.x);
    route = "laplace";
  }
  if (!flags.json) return WriteOutput("", Num(value) + "\n", out);
  json j;
  j["meta"] = meta.ToJson();
  j["function"] = f->Spec();
  j["route"] = route;
  j["x"] = JsonNum(flags.x);
  j["estimate"] = JsonNum(value);
  return WriteOutput("", j.dump(2) + "\n", out);
}

struct BiasCheckFlags {
  std::string function = "abs";
  std::string q = "0,0.5,1,2";
  std::string b = "0.5,1";
  int64_t samples = 1'000'000;
  std::string seed;
  int streams = 1;
  std::string out;
};

absl::Status RunBiasCheck(const BiasCheckFlags& flags, const RunMeta& meta,
                          std::ostream& out) {
  auto f = ParseFunction(flags.function);
  if (!f.ok()) return f.status();
  auto qs = ParseDoubleList("--q", flags.q);
  if (!qs.ok()) return qs.status();
  auto bs = ParseDoubleList("--b", flags.b);
  if (!bs.ok()) return bs.status();
  std::string csv = meta.CsvComment() + "q,b,analytic_bias,mc_bias,mc_se\n";
  for (double q : *qs) {
    for (double b : *bs) {
      auto mc = PlugInBiasMonteCarlo(*f, q, b, flags.samples, *meta.seed,
                                     flags.streams);
      if (!mc.ok()) return mc.status();
      const double analytic =
          PlugInBiasExact(*f, q, b).value_or(std::nan(""));
      absl::StrAppend(&csv, Num(q), ",", Num(b), ",",
                      std::isnan(analytic) ? "nan" : Num(analytic), ",",
                      Num(mc->mean), ",", Num(mc->std_err), "\n");
    }
  }
  return WriteOutput(flags.out, csv, out);
}

struct OptimizeFlags {
  std::string function = "inverse";
  double lower_bound = 1;
  int k = 10;
  double b = 2;
  std::string prior;
  std::string out;
  std::string csv;
  std::string q;
};

absl::Status RunOptimize(const OptimizeFlags& flags, const RunMeta& meta,
                         std::ostream& out) {
  auto f = ParseFunction(flags.function);
  if (!f.ok()) return f.status();
  auto sol = SolveExtension(*f, flags.lower_bound, flags.k, flags.b,
                            flags.prior);
  if (!sol.ok()) return sol.status();

  std::string csv;
  if (!flags.csv.empty()) {
    std::vector<double> grid;
    if (!flags.q.empty()) {
      auto qs = ParseDoubleList("--q", flags.q);
      if (!qs.ok()) return qs.status();
      grid = *qs;
    } else {
      // 20 points over the uniform prior's support, or [L, L + 100].
      const PriorMeasure& mu = sol->problem().prior;
      const double lo = mu.is_uniform() ? mu.lo() : flags.lower_bound;
      const double hi = mu.is_uniform() ? mu.hi() : flags.lower_bound + 100;
      for (int i = 0; i < 20; ++i) grid.push_back(lo + (hi - lo) * i / 19.0);
    }
    csv = meta.CsvComment() + "q,expectation,variance\n";
    for (double q : grid) {
      auto mean = EstimatorExpectation(*sol, q);
      if (!mean.ok()) return mean.status();
      auto var = EstimatorVariance(*sol, q);
      if (!var.ok()) return var.status();
      absl::StrAppend(&csv, Num(q), ",", Num(*mean), ",", Num(*var), "\n");
    }
  }

  json j;
  j["meta"] = meta.ToJson();
  j["function"] = f->Spec();
  j["prior"] = sol->problem().prior.Spec();
  j["a"] = JsonList(sol->g().coeffs());
  j["h"] = JsonList(sol->h().coeffs());
  j["objective"] = JsonNum(sol->objective());
  j["taylor_objective"] = JsonNum(sol->taylor_objective());
  j["grad_norm"] = JsonNum(sol->grad_norm());
  j["q_condition"] = JsonNum(sol->q_condition());
  j["used_fallback"] = sol->used_fallback();
  const std::array<double, 3> r = ConstraintResiduals(*sol);
  j["constraint_residuals"] = JsonList({r[0], r[1], r[2]});
  // Write the CSV first; both outputs are complete before either is renamed.
  if (!flags.csv.empty()) {
    if (absl::Status s = WriteOutput(flags.csv, csv, out); !s.ok()) return s;
  }
  return WriteOutput(flags.out, j.dump(2) + "\n", out);
}

struct MeanSweepFlags {
  double eps1 = 0.5;
  double eps2 = 0.5;
  double m = 0.5;
  int k = 10;
  double lower_bound = 1;
  std::string n = "1:300";
  std::string beta;
  std::string tau;
  std::string prior;
  std::string out;
  std::string plot;
};

std::string SweepSvg(const std::vector<SweepRow>& rows, const RunMeta& meta) {
  Series mu{"sd M_U", "#1f77b4", {}, {}};
  Series mss{"sd M_SS", "#d62728", {}, {}};
  Series ratio{"ratio", "#2ca02c", {}, {}};
  Series mu_zoom = mu, mss_zoom = mss;
  const int64_t n_first = rows.front().n;
  const int64_t n_last = rows.back().n;
  const int64_t zoom_from = std::min<int64_t>(std::max<int64_t>(n_first, 50),
                                              n_first + (n_last - n_first) / 2);
  for (const SweepRow& r : rows) {
    const double n = static_cast<double>(r.n);
    mu.x.push_back(n);
    mu.y.push_back(r.sd_mu);
    mss.x.push_back(n);
    mss.y.push_back(r.sd_mss);
    ratio.x.push_back(n);
    ratio.y.push_back(r.ratio);
    if (r.n >= zoom_from) {
      mu_zoom.x.push_back(n);
      mu_zoom.y.push_back(r.sd_mu);
      mss_zoom.x.push_back(n);
      mss_zoom.y.push_back(r.sd_mss);
    }
  }
  std::vector<Panel> panels = {
      {"Standard deviation of the released mean", "n", "sd (log scale)", true,
       {mu, mss}},
      {absl::StrCat("Standard deviation for n >= ", zoom_from), "n", "sd",
       false, {mu_zoom, mss_zoom}},
      {"Ratio of standard deviations", "n", "sd M_SS / sd M_U", false,
       {ratio}},
  };
  return RenderSvg(panels, meta.SvgComment());
}

absl::Status RunMeanSweep(const MeanSweepFlags& flags, const RunMeta& meta,
                          std::ostream& out, std::ostream& err) {
  auto grid = ParseIntRange("--n", flags.n);
  if (!grid.ok()) return grid.status();
  if (flags.beta.empty() != flags.tau.empty()) {
    return absl::InvalidArgumentError("--beta and --tau must be given together");
  }
  absl::StatusOr<MssParams> mss = absl::UnknownError("unset");
  if (flags.beta.empty()) {
    mss = MssParams::WithDefaultNoise(flags.eps1, flags.eps2);
  } else {
    auto beta = ParseDouble("--beta", flags.beta);
    if (!beta.ok()) return beta.status();
    auto tau = ParseDouble("--tau", flags.tau);
    if (!tau.ok()) return tau.status();
    mss = MssParams::Create(flags.eps1, flags.eps2, *beta, *tau);
  }
  if (!mss.ok()) return mss.status();
  auto prior = PriorOrDefault(flags.prior, flags.lower_bound);
  if (!prior.ok()) return prior.status();
  auto mu = MuParams::Create(flags.eps1, flags.eps2, flags.k,
                             flags.lower_bound, *prior);
  if (!mu.ok()) return mu.status();
  auto rows = SdSweep(*grid, flags.m, *mu, *mss);
  if (!rows.ok()) return rows.status();

  std::string csv = meta.CsvComment() + "n,sd_mu,sd_mss,ratio\n";
  std::optional<int64_t> crossover;
  for (const SweepRow& r : *rows) {
    absl::StrAppend(&csv, r.n, ",", Num(r.sd_mu), ",", Num(r.sd_mss), ",",
                    Num(r.ratio), "\n");
    if (!crossover && r.sd_mss > r.sd_mu) crossover = r.n;
  }
  if (!flags.plot.empty()) {
    if (absl::Status s = WriteOutput(flags.plot, SweepSvg(*rows, meta), out);
        !s.ok()) {
      return s;
    }
  }
  if (crossover) err << "first n with sd_mss > sd_mu: " << *crossover << "\n";
  return WriteOutput(flags.out, csv, out);
}

struct PrdpSumFlags {
  std::string records;
  int k = 2;
  double a = 0;
  double b = 1;
  std::string c = "1";
  std::string seed;
  std::string out;
};

absl::StatusOr<std::vector<double>> ReadRecords(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    return absl::NotFoundError(absl::StrCat("cannot read '", path, "'"));
  }
  std::vector<double> values;
  std::string line;
  for (int line_no = 1; std::getline(in, line); ++line_no) {
    absl::string_view text = absl::StripAsciiWhitespace(line);
    if (text.empty() || text.front() == '#') continue;
    double v;
    if (!absl::SimpleAtod(text, &v) || !std::isfinite(v) || v < 0) {
      return absl::InvalidArgumentError(
          absl::StrCat(path, ":", line_no, ": expected a nonnegative number, "
                       "got '", text, "'"));
    }
    values.push_back(v);
  }
  return values;
}

absl::Status RunPrdpSum(const PrdpSumFlags& flags, const RunMeta& meta,
                        std::ostream& out) {
  auto records = ReadRecords(flags.records);
  if (!records.ok()) return records.status();
  auto cs = ParseDoubleList("--c", flags.c);
  if (!cs.ok()) return cs.status();
  auto spec = TransformSpec::KthRoot(flags.k, flags.a, flags.b);
  if (!spec.ok()) return spec.status();

  double q = 0;
  for (double v : *records) q += v;
  RngStream rng(*meta.seed, 0);
  auto release = TransformRelease(q, *spec, rng);
  if (!release.ok()) return release.status();

  json table = json::array();
  for (double c : *cs) {
    auto p = Policy(c, *spec);
    if (!p.ok()) return p.status();
    table.push_back({{"c", JsonNum(c)}, {"P", JsonNum(*p)}});
  }
  json j;
  j["meta"] = meta.ToJson();
  j["transform"] = spec->DebugString();
  j["S_tilde"] = JsonNum(release->s_tilde);
  j["v_tilde"] = JsonNum(release->v_tilde);
  j["policy_table"] = table;
  return WriteOutput(flags.out, j.dump(2) + "\n", out);
}

struct PolyDebiasFlags {
  std::string coeffs;
  std::string moments;
  std::string x;
  bool json = false;
  std::string out;
};

absl::Status RunPolyDebias(const PolyDebiasFlags& flags, const RunMeta& meta,
                           std::ostream& out, std::ostream& err) {
  auto coeffs = ParseDoubleList("--coeffs", flags.coeffs);
  if (!coeffs.ok()) return coeffs.status();
  auto moments = ParseDoubleList("--moments", flags.moments);
  if (!moments.ok()) return moments.status();
  const Polynomial target(*coeffs);
  auto a = DebiasCoeffs(target, *moments);
  if (!a.ok()) return a.status();
  auto m = MomentMatrix::Create(*moments, std::max(target.Degree(), 0));
  if (!m.ok()) return m.status();
  const double cond = m->ConditionNumber();
  if (cond > kConditionWarning) {
    err << "warning: moment matrix condition number " << Num(cond)
        << " exceeds " << Num(kConditionWarning) << "\n";
  }
  std::optional<double> x;
  if (!flags.x.empty()) {
    auto v = ParseDouble("--x", flags.x);
    if (!v.ok()) return v.status();
    x = *v;
  }

  if (flags.json) {
    json j;
    j["meta"] = meta.ToJson();
    j["a"] = JsonList(a->coeffs());
    j["condition_number"] = JsonNum(cond);
    if (x) {
      j["x"] = JsonNum(*x);
      j["g"] = JsonNum(a->Evaluate(*x));
    }
    return WriteOutput(flags.out, j.dump(2) + "\n", out);
  }
  std::string text = absl::StrCat("a = ", NumList(a->coeffs()), "\n");
  if (x) absl::StrAppend(&text, "g(", Num(*x), ") = ", Num(a->Evaluate(*x)), "\n");
  return WriteOutput(flags.out, text, out);
}

struct McCheckFlags {
  std::string function;
  double b = 1;
  std::string q;
  std::string lower_bound;
  int k = 10;
  std::string prior;
  int64_t samples = 1'000'000;
  std::string seed;
  int streams = 1;
  std::string out;
};

absl::Status RunMcCheck(const McCheckFlags& flags, const RunMeta& meta,
                        std::ostream& out) {
  auto f = ParseFunction(flags.function);
  if (!f.ok()) return f.status();
  auto qs = ParseDoubleList("--q", flags.q);
  if (!qs.ok()) return qs.status();
  if (flags.samples < 2) {
    return absl::InvalidArgumentError("--samples must be at least 2");
  }

  std::function<double(double)> estimate;
  std::optional<ExtensionSolution> sol;
  std::optional<LaplaceEstimator> g;
  if (!flags.lower_bound.empty()) {
    auto lower = ParseDouble("--L", flags.lower_bound);
    if (!lower.ok()) return lower.status();
    for (double q : *qs) {
      if (q < *lower) {
        return absl::InvalidArgumentError(absl::StrCat(
            "--q: ", Num(q), " is below --L ", Num(*lower),
            "; the extension estimator targets q >= L only"));
      }
    }
    auto s = SolveExtension(*f, *lower, flags.k, flags.b, flags.prior);
    if (!s.ok()) return s.status();
    sol = *std::move(s);
    estimate = [&sol](double x) { return sol->Estimate(x); };
  } else {
    auto est = LaplaceEstimator::Create(*f, flags.b);
    if (!est.ok()) return est.status();
    g = *std::move(est);
    estimate = [&g](double x) { return g->Estimate(x); };
  }

  std::string csv = meta.CsvComment() + "q,target,mc_mean,mc_se,z,pass\n";
  bool all_pass = true;
  for (double q : *qs) {
    const double target = f->Value(q);
    RunningStats stats = ParallelMonteCarlo(
        flags.samples, *meta.seed, flags.streams, [&](RngStream& rng) {
          return estimate(q + SampleLaplace(flags.b, rng));
        });
    const double se = stats.StdErrorOfMean();
    const double z = se > 0 ? (stats.mean() - target) / se
                            : (stats.mean() == target ? 0.0 : INFINITY);
    const bool pass = std::abs(z) <= kMcCheckZ;
    all_pass = all_pass && pass;
    absl::StrAppend(&csv, Num(q), ",", Num(target), ",", Num(stats.mean()),
                    ",", Num(se), ",", Num(z), ",", pass ? "true" : "false",
                    "\n");
  }
  if (absl::Status s = WriteOutput(flags.out, csv, out); !s.ok()) return s;
  if (!all_pass) {
    return absl::AbortedError(absl::StrCat(
        "mc-check: at least one q has |z| > ", Num(kMcCheckZ)));
  }
  return absl::OkStatus();
}

int ExitCode(const absl::Status& s) {
  switch (s.code()) {
    case absl::StatusCode::kOk:
      return kExitOk;
    case absl::StatusCode::kInvalidArgument:
    case absl::StatusCode::kOutOfRange:
    case absl::StatusCode::kNotFound:
    case absl::StatusCode::kFailedPrecondition:
      return kExitUsage;
    default:
      return kExitFailure;
  }
}

}  // namespace

int Dispatch(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err) {
  CLI::App app{"Unbiased estimates of functions of privately released "
               "statistics.",
               "debias"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  EstimateFlags est;
  CLI::App* est_cmd = app.add_subcommand(
      "estimate", "Unbiased estimate of f(q) from one noisy value x.");
  est_cmd->add_option("--function", est.function,
                      "Function spec, e.g. power:3 or a JSON object")
      ->required();
  est_cmd->add_option("--b", est.b, "Laplace noise scale")->required();
  est_cmd->add_option("--x", est.x, "Noisy observation")->required();
  est_cmd->add_option("--L", est.lower_bound,
                      "Use the polynomial extension for q >= L");
  est_cmd->add_option("--k", est.k, "Extension degree (with --L)");
  est_cmd->add_option("--prior", est.prior,
                      "Extension prior: uniform:LO:HI, point:Q, "
                      "discrete:Q@W,...");
  est_cmd->add_flag("--json", est.json, "Print JSON instead of the bare value");

  BiasCheckFlags bias;
  CLI::App* bias_cmd = app.add_subcommand(
      "bias-check", "Plug-in bias f(q + noise) - f(q), analytic and MC.");
  bias_cmd->add_option("--function", bias.function, "Function spec");
  bias_cmd->add_option("--q", bias.q, "Comma-separated true values");
  bias_cmd->add_option("--b", bias.b, "Comma-separated noise scales");
  bias_cmd->add_option("--samples", bias.samples, "MC draws per cell");
  bias_cmd->add_option("--seed", bias.seed, "RNG seed");
  bias_cmd->add_option("--streams", bias.streams, "Parallel RNG streams")
      ->check(CLI::PositiveNumber);
  bias_cmd->add_option("--out", bias.out, "CSV path (default stdout)");

  OptimizeFlags opt;
  CLI::App* opt_cmd = app.add_subcommand(
      "optimize", "Optimal polynomial extension below L.");
  opt_cmd->add_option("--function", opt.function, "Function spec");
  opt_cmd->add_option("--L", opt.lower_bound, "Lower bound of the domain");
  opt_cmd->add_option("--k", opt.k, "Extension degree");
  opt_cmd->add_option("--b", opt.b, "Laplace noise scale");
  opt_cmd->add_option("--prior", opt.prior,
                      "uniform:LO:HI, point:Q or discrete:Q@W,... "
                      "(default point:L)");
  opt_cmd->add_option("--out", opt.out, "JSON path (default stdout)");
  opt_cmd->add_option("--csv", opt.csv,
                      "Also write q,expectation,variance to this CSV");
  opt_cmd->add_option("--q", opt.q, "Comma-separated q grid for --csv");

  MeanSweepFlags sweep;
  CLI::App* sweep_cmd = app.add_subcommand(
      "mean-sweep", "Standard deviations of the two mean mechanisms over n.");
  sweep_cmd->add_option("--eps1", sweep.eps1, "Budget for the count");
  sweep_cmd->add_option("--eps2", sweep.eps2, "Budget for the sum");
  sweep_cmd->add_option("--m", sweep.m, "True mean, in [0, 1]");
  sweep_cmd->add_option("--k", sweep.k, "Extension degree for 1/n");
  sweep_cmd->add_option("--L", sweep.lower_bound, "Smallest admissible n");
  sweep_cmd->add_option("--n", sweep.n, "START:END[:STEP]");
  sweep_cmd->add_option("--beta", sweep.beta,
                        "Smooth-sensitivity beta (with --tau)");
  sweep_cmd->add_option("--tau", sweep.tau, "t3 noise scale (with --beta)");
  sweep_cmd->add_option("--prior", sweep.prior, "Extension prior");
  sweep_cmd->add_option("--out", sweep.out, "CSV path (default stdout)");
  sweep_cmd->add_option("--plot", sweep.plot, "Also render an SVG here");

  PrdpSumFlags prdp;
  CLI::App* prdp_cmd = app.add_subcommand(
      "prdp-sum", "Per-record-private release of a sum of records.");
  prdp_cmd->add_option("--records", prdp.records,
                       "CSV with one nonnegative value per row")
      ->required();
  prdp_cmd->add_option("--k", prdp.k, "Root order of the transform");
  prdp_cmd->add_option("--a", prdp.a, "Shift a >= 0");
  prdp_cmd->add_option("--b", prdp.b, "Laplace noise scale");
  prdp_cmd->add_option("--c", prdp.c,
                       "Comma-separated record values for the policy table");
  prdp_cmd->add_option("--seed", prdp.seed, "RNG seed");
  prdp_cmd->add_option("--out", prdp.out, "JSON path (default stdout)");

  PolyDebiasFlags poly;
  CLI::App* poly_cmd = app.add_subcommand(
      "poly-debias", "Unbiased polynomial under noise with given moments.");
  poly_cmd->add_option("--coeffs", poly.coeffs,
                       "Target coefficients, constant term first")
      ->required();
  poly_cmd->add_option("--moments", poly.moments,
                       "Noise raw moments mu_0, mu_1, ... (mu_0 = 1)")
      ->required();
  poly_cmd->add_option("--x", poly.x, "Evaluate g at this noisy value");
  poly_cmd->add_flag("--json", poly.json, "Print JSON");
  poly_cmd->add_option("--out", poly.out, "Output path (default stdout)");

  McCheckFlags mc;
  CLI::App* mc_cmd = app.add_subcommand(
      "mc-check", "Monte Carlo check that an estimator is unbiased.");
  mc_cmd->add_option("--function", mc.function, "Function spec")->required();
  mc_cmd->add_option("--b", mc.b, "Laplace noise scale");
  mc_cmd->add_option("--q", mc.q, "Comma-separated true values")->required();
  mc_cmd->add_option("--L", mc.lower_bound,
                     "Check the polynomial extension for q >= L");
  mc_cmd->add_option("--k", mc.k, "Extension degree (with --L)");
  mc_cmd->add_option("--prior", mc.prior, "Extension prior (with --L)");
  mc_cmd->add_option("--samples", mc.samples, "MC draws per q");
  mc_cmd->add_option("--seed", mc.seed, "RNG seed");
  mc_cmd->add_option("--streams", mc.streams, "Parallel RNG streams")
      ->check(CLI::PositiveNumber);
  mc_cmd->add_option("--out", mc.out, "CSV path (default stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  RunMeta meta{sub->get_name(), std::nullopt, CollectArgs(*sub)};
  auto with_seed = [&](const std::string& text) -> absl::Status {
    auto seed = ResolveSeed(text, err);
    if (!seed.ok()) return seed.status();
    meta.seed = *seed;
    meta.args.erase("seed");
    return absl::OkStatus();
  };

  absl::Status status;
  try {
    if (sub == est_cmd) {
      status = RunEstimate(est, meta, out);
    } else if (sub == bias_cmd) {
      status = with_seed(bias.seed);
      if (status.ok()) status = RunBiasCheck(bias, meta, out);
    } else if (sub == opt_cmd) {
      status = RunOptimize(opt, meta, out);
    } else if (sub == sweep_cmd) {
      status = RunMeanSweep(sweep, meta, out, err);
    } else if (sub == prdp_cmd) {
      status = with_seed(prdp.seed);
      if (status.ok()) status = RunPrdpSum(prdp, meta, out);
    } else if (sub == poly_cmd) {
      status = RunPolyDebias(poly, meta, out, err);
    } else if (sub == mc_cmd) {
      status = with_seed(mc.seed);
      if (status.ok()) status = RunMcCheck(mc, meta, out);
    }
  } catch (const std::exception& e) {
    status = absl::InternalError(e.what());
  }
  if (!status.ok()) {
    err << "debias " << sub->get_name() << ": " << status.message() << "\n";
  }
  return ExitCode(status);
}

}  // namespace debias::cli
