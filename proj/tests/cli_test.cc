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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "debias/format.h"
#include "debias/laplace_debias.h"
#include "debias/mean_mechanisms.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "json.hpp"

namespace debias::cli {
namespace {

namespace fs = std::filesystem;
using ::testing::HasSubstr;
using ::testing::Not;
using ::testing::StartsWith;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result RunCli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = Dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// First line that is not a metadata comment.
std::string HeaderRow(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') return line;
  }
  return "";
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("debias_cli_test_" +
            std::string(
                ::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string Path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST_F(CliTest, EstimatePrintsPowerEstimate) {
  Result r = RunCli({"estimate", "--function", "power:3", "--b", "0.5", "--x", "2"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_EQ(r.out, FormatDouble(PowerEstimate(3, 0.5, 2)) + "\n");
  EXPECT_EQ(r.out, "5\n");
}

TEST_F(CliTest, EstimateAcceptsJsonFunctionSpec) {
  Result r = RunCli({"estimate", "--function", R"({"name": "power", "params": [3]})",
                  "--b", "0.5", "--x", "2"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_EQ(r.out, "5\n");
}

TEST_F(CliTest, EstimateJsonCarriesMetadata) {
  Result r = RunCli({"estimate", "--function", "cos:1", "--b", "1", "--x", "0",
                  "--json"});
  ASSERT_EQ(r.code, kExitOk);
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["meta"]["version"], kVersion);
  EXPECT_EQ(j["meta"]["command"], "estimate");
  EXPECT_EQ(j["meta"]["args"]["function"], "cos:1");
  EXPECT_DOUBLE_EQ(j["estimate"].get<double>(), 2.0);  // cos(0) + cos(0)
}

TEST_F(CliTest, EstimateExtensionRoute) {
  Result r = RunCli({"estimate", "--function", "inverse", "--b", "2", "--x", "50",
                  "--L", "1", "--k", "4"});
  EXPECT_EQ(r.code, kExitOk);
  const double v = std::stod(r.out);
  EXPECT_NEAR(v, 1.0 / 50 - 4.0 * 2.0 / (50.0 * 50 * 50), 1e-12);
}

TEST_F(CliTest, PolyDebiasLaplaceSquare) {
  Result r = RunCli({"poly-debias", "--coeffs", "0,0,1", "--moments", "1,0,2",
                  "--x", "3.5"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_EQ(r.out, "a = [-2, 0, 1]\ng(3.5) = 10.25\n");
}

TEST_F(CliTest, PolyDebiasJson) {
  Result r = RunCli({"poly-debias", "--coeffs", "0,0,1", "--moments", "1,0,2",
                  "--json"});
  ASSERT_EQ(r.code, kExitOk);
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["a"], nlohmann::json({-2.0, 0.0, 1.0}));
  EXPECT_GE(j["condition_number"].get<double>(), 1.0);
}

TEST_F(CliTest, PolyDebiasWarnsOnIllConditioning) {
  // Moments of a wide uniform noise make the degree-8 system ill conditioned.
  std::vector<std::string> mu = {"1"};
  const double half_width = 1e3;
  for (int n = 1; n <= 8; ++n) {
    mu.push_back(n % 2 ? "0"
                       : FormatDouble(std::pow(half_width, n) / (n + 1)));
  }
  std::string moments;
  for (size_t i = 0; i < mu.size(); ++i) moments += (i ? "," : "") + mu[i];
  Result r = RunCli({"poly-debias", "--coeffs", "0,0,0,0,0,0,0,0,1", "--moments",
                  moments});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_THAT(r.err, HasSubstr("condition number"));
}

TEST_F(CliTest, MeanSweepCsvMatchesLibrary) {
  const std::string csv = Path("sweep.csv");
  Result r = RunCli({"mean-sweep", "--eps1", "0.5", "--eps2", "0.5", "--m", "0.5",
                  "--k", "10", "--L", "1", "--n", "1:300", "--out", csv});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const std::string text = ReadFile(csv);
  EXPECT_EQ(HeaderRow(text), "n,sd_mu,sd_mss,ratio");

  auto mu = MuParams::Create(0.5, 0.5, 10, 1);
  auto mss = MssParams::WithDefaultNoise(0.5, 0.5);
  ASSERT_TRUE(mu.ok() && mss.ok());
  std::vector<int64_t> grid;
  for (int64_t n = 1; n <= 300; ++n) grid.push_back(n);
  auto rows = SdSweep(grid, 0.5, *mu, *mss);
  ASSERT_TRUE(rows.ok());

  std::istringstream in(text);
  std::string line;
  std::getline(in, line);  // metadata
  std::getline(in, line);  // header
  int64_t crossover_csv = -1, crossover_lib = -1;
  for (const SweepRow& row : *rows) {
    ASSERT_TRUE(std::getline(in, line));
    std::vector<double> fields;
    std::istringstream ls(line);
    for (std::string f; std::getline(ls, f, ',');) fields.push_back(std::stod(f));
    ASSERT_EQ(fields.size(), 4u);
    EXPECT_EQ(fields[0], row.n);
    EXPECT_EQ(fields[1], row.sd_mu);
    EXPECT_EQ(fields[2], row.sd_mss);
    if (crossover_csv < 0 && fields[2] > fields[1]) crossover_csv = row.n;
    if (crossover_lib < 0 && row.sd_mss > row.sd_mu) crossover_lib = row.n;
  }
  EXPECT_FALSE(std::getline(in, line));
  EXPECT_EQ(crossover_csv, crossover_lib);
  EXPECT_THAT(r.err, HasSubstr("first n with sd_mss > sd_mu: " +
                               std::to_string(crossover_lib)));
}

TEST_F(CliTest, MeanSweepPlotHasThreePanels) {
  const std::string svg = Path("sweep.svg");
  Result r = RunCli({"mean-sweep", "--n", "1:300:3", "--out", Path("s.csv"),
                  "--plot", svg});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const std::string text = ReadFile(svg);
  EXPECT_THAT(text, StartsWith("<?xml"));
  EXPECT_THAT(text, HasSubstr("\"command\":\"mean-sweep\""));
  int panels = 0;
  for (size_t i = text.find("<rect x="); i != std::string::npos;
       i = text.find("<rect x=", i + 1)) {
    ++panels;
  }
  EXPECT_EQ(panels, 3);
  EXPECT_EQ(text.find("--", text.find("-->") + 3), std::string::npos);
}

TEST_F(CliTest, BiasCheckSchemaAndAnalyticColumn) {
  Result r = RunCli({"bias-check", "--function", "abs", "--q", "0,1", "--b", "1",
                  "--samples", "100000", "--seed", "7"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_THAT(r.out, StartsWith("# {\"version\":\"0.1.0\""));
  EXPECT_EQ(HeaderRow(r.out), "q,b,analytic_bias,mc_bias,mc_se");
  EXPECT_THAT(r.out, HasSubstr("\n0,1,1,"));
  EXPECT_THAT(r.out, HasSubstr("\n1,1," + FormatDouble(std::exp(-1.0)) + ","));
}

TEST_F(CliTest, BiasCheckNanWithoutClosedForm) {
  Result r = RunCli({"bias-check", "--function", "kth_root:2", "--q", "4", "--b",
                  "0.5", "--samples", "10000", "--seed", "1"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_THAT(r.out, HasSubstr("\n4,0.5,nan,"));
}

TEST_F(CliTest, OptimizeJsonAndCsv) {
  const std::string json_path = Path("opt.json");
  const std::string csv_path = Path("opt.csv");
  Result r = RunCli({"optimize", "--function", "inverse", "--L", "1", "--k", "10",
                  "--b", "2", "--prior", "uniform:1:200", "--out", json_path,
                  "--csv", csv_path});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  auto j = nlohmann::json::parse(ReadFile(json_path));
  EXPECT_EQ(j["a"].size(), 11u);
  EXPECT_EQ(j["h"].size(), 11u);
  EXPECT_LE(j["objective"].get<double>(), j["taylor_objective"].get<double>());
  EXPECT_FALSE(j["used_fallback"].get<bool>());
  for (const auto& res : j["constraint_residuals"]) {
    EXPECT_LE(std::abs(res.get<double>()), 1e-9);
  }
  const std::string csv = ReadFile(csv_path);
  EXPECT_EQ(HeaderRow(csv), "q,expectation,variance");
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  int rows = 0;
  while (std::getline(in, line)) {
    const double q = std::stod(line.substr(0, line.find(',')));
    const double e = std::stod(line.substr(line.find(',') + 1));
    EXPECT_NEAR(e, 1.0 / q, 1e-6);
    ++rows;
  }
  EXPECT_EQ(rows, 20);
}

TEST_F(CliTest, PrdpSumRelease) {
  const std::string records = Path("records.csv");
  std::ofstream(records) << "# values\n1\n\n4\n  9  \n";
  const std::string out = Path("release.json");
  Result r = RunCli({"prdp-sum", "--records", records, "--k", "2", "--a", "0",
                  "--b", "1", "--seed", "3", "--c", "1,4,9", "--out", out});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  auto j = nlohmann::json::parse(ReadFile(out));
  EXPECT_TRUE(j["S_tilde"].is_number());
  EXPECT_TRUE(j["v_tilde"].is_number());
  // S~ = v~^2 - b^2 * 2 - a.
  const double v = j["v_tilde"].get<double>();
  EXPECT_NEAR(j["S_tilde"].get<double>(), v * v - 2.0, 1e-12);
  ASSERT_EQ(j["policy_table"].size(), 3u);
  EXPECT_DOUBLE_EQ(j["policy_table"][1]["c"].get<double>(), 4.0);
  EXPECT_DOUBLE_EQ(j["policy_table"][1]["P"].get<double>(), 2.0);
  EXPECT_EQ(j["meta"]["seed"], 3);
}

TEST_F(CliTest, McCheckPasses) {
  Result r = RunCli({"mc-check", "--function", "power:2", "--b", "1", "--q",
                  "0,3", "--samples", "200000", "--seed", "11"});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(HeaderRow(r.out), "q,target,mc_mean,mc_se,z,pass");
  EXPECT_THAT(r.out, Not(HasSubstr("false")));
}

TEST_F(CliTest, McCheckRejectsQBelowL) {
  Result r = RunCli({"mc-check", "--function", "inverse", "--b", "2", "--L", "1",
                  "--q", "0.5", "--seed", "1"});
  EXPECT_EQ(r.code, kExitUsage);
}

TEST_F(CliTest, IdenticalRunsAreByteIdentical) {
  const std::vector<std::vector<std::string>> commands = {
      {"bias-check", "--samples", "20000", "--seed", "42", "--streams", "3"},
      {"mc-check", "--function", "cos:2", "--q", "0,1", "--samples", "20000",
       "--seed", "42"},
      {"mean-sweep", "--n", "1:60"},
      {"optimize", "--k", "6"},
  };
  for (const auto& base : commands) {
    std::vector<std::string> args = base;
    args.push_back("--out");
    args.push_back(Path("a.out"));
    ASSERT_EQ(RunCli(args).code, kExitOk) << base[0];
    args.back() = Path("b.out");
    ASSERT_EQ(RunCli(args).code, kExitOk) << base[0];
    const std::string a = ReadFile(Path("a.out"));
    std::string b = ReadFile(Path("b.out"));
    // The output path is part of the recorded flags.
    const size_t at = b.find("b.out");
    ASSERT_NE(at, std::string::npos);
    b.replace(at, 5, "a.out");
    EXPECT_EQ(a, b) << base[0];
  }
}

TEST_F(CliTest, GeneratedSeedIsReported) {
  Result r = RunCli({"bias-check", "--q", "0", "--b", "1", "--samples", "10000"});
  ASSERT_EQ(r.code, kExitOk);
  EXPECT_THAT(r.err, StartsWith("seed: "));
  const std::string seed = r.err.substr(6, r.err.find('\n') - 6);
  EXPECT_THAT(r.out, HasSubstr("\"seed\":" + seed));
}

TEST_F(CliTest, ValidationErrorsExitTwo) {
  const std::vector<std::vector<std::string>> bad = {
      {},
      {"no-such-command"},
      {"estimate", "--b", "1", "--x", "0"},
      {"estimate", "--function", "power:3", "--b", "zero", "--x", "0"},
      {"estimate", "--function", "nope", "--b", "1", "--x", "0"},
      {"estimate", "--function", "abs", "--b", "1", "--x", "0"},
      {"estimate", "--function", "power:3", "--b", "-1", "--x", "0"},
      {"optimize", "--L", "1", "--prior", "uniform:0.5:10"},
      {"optimize", "--L", "1", "--prior", "point:0"},
      {"optimize", "--k", "1"},
      {"mean-sweep", "--beta", "0.1"},
      {"mean-sweep", "--n", "10:1"},
      {"mean-sweep", "--m", "2"},
      {"poly-debias", "--coeffs", "1,2", "--moments", "2,0"},
      {"poly-debias", "--coeffs", "1,x", "--moments", "1,0"},
      {"prdp-sum", "--records", "/nonexistent/records.csv", "--seed", "1"},
      {"bias-check", "--seed", "-5"},
      {"bias-check", "--unknown-flag"},
  };
  for (const auto& args : bad) {
    Result r = RunCli(args);
    EXPECT_EQ(r.code, kExitUsage) << ::testing::PrintToString(args);
    EXPECT_FALSE(r.err.empty()) << ::testing::PrintToString(args);
  }
}

TEST_F(CliTest, FailedRunLeavesNoFiles) {
  const std::string out = Path("opt.json");
  Result r = RunCli({"optimize", "--L", "1", "--prior", "point:0", "--out", out});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_TRUE(fs::is_empty(dir_));

  const std::string records = Path("r.csv");
  std::ofstream(records) << "1\n-3\n";
  r = RunCli({"prdp-sum", "--records", records, "--seed", "1", "--out",
           Path("release.json")});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_THAT(r.err, HasSubstr("r.csv:2"));
  EXPECT_FALSE(fs::exists(Path("release.json")));
}

TEST_F(CliTest, HelpAndVersionExitZero) {
  Result r = RunCli({"--help"});
  EXPECT_EQ(r.code, kExitOk);
  for (const char* cmd : {"estimate", "bias-check", "optimize", "mean-sweep",
                          "prdp-sum", "poly-debias", "mc-check"}) {
    EXPECT_THAT(r.out, HasSubstr(cmd));
  }
  r = RunCli({"--version"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_THAT(r.out, HasSubstr(kVersion));
}

}  // namespace
}  // namespace debias::cli
