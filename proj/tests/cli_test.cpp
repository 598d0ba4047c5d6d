// Copyright 2026 The lrphase Authors
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


#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Regression value for the (7, 1, chi2 = 1.7) plan at eta = 0.6.
constexpr double kSevenPlusOneVariance = 0.2963458477377119;

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path scratch_dir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("lrphase_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run run(const std::string& args) {
  const auto out = scratch_dir() / "stdout.txt";
  const auto err = scratch_dir() / "stderr.txt";
  const std::string cmd = std::string(LRPHASE_CLI_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

TEST(Cli, StatePrepFidelity) {
  const auto r = run("state-prep --chi 1.7 --half-n 1");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_NEAR(j.at("fidelity").get<double>(), 1.0, 1e-10);
  EXPECT_EQ(j.at("command"), "state-prep");
  EXPECT_EQ(j.at("version"), "0.1.0");
  EXPECT_TRUE(j.contains("wall_time_ms"));
  EXPECT_EQ(j.at("config").at("chi"), 1.7);
}

TEST(Cli, StatePrepFourPhotonChiZero) {
  const auto r = run("state-prep --chi 0 --half-n 2");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto re = json::parse(r.out).at("state").at("re");
  const double norm = std::sqrt(2.0 + 4.0 / 6.0);
  const std::vector<double> expected{1 / norm, 0.0, 2 / std::sqrt(6.0) / norm, 0.0, 1 / norm};
  ASSERT_EQ(re.size(), expected.size());
  for (std::size_t k = 0; k < expected.size(); ++k) EXPECT_NEAR(re[k].get<double>(), expected[k], 1e-12);
}

TEST(Cli, StatePrepRejectsChiOutOfRange) {
  const auto r = run("state-prep --chi 3");
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(r.err.empty());
}

TEST(Cli, UnknownFlagIsUsageError) {
  EXPECT_EQ(run("state-prep --bogus 1").code, 2);
  EXPECT_EQ(run("--format xml state-prep").code, 2);
}

TEST(Cli, ProbsDumpsTable) {
  const auto r = run("probs --state loss-resistant --half-n 1 --chi 1.7 --eta 0.6 --phi pi/4 --theta 0");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j.at("table").at("entries").size(), 6u);
  double total = 0.0;
  for (const auto& p : j.at("probabilities")) total += p.at("p").get<double>();
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_NEAR(j.at("config").at("phi").get<double>(), 0.7853981633974483, 1e-15);
}

TEST(Cli, FisherScanCsv) {
  const auto r = run("fisher-scan --n-photons 2 --eta 0.6 --phi pi/4 --theta 0 --chi-min 0 --chi-max 2 --chi-step 0.02");
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "chi,fisher");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 101);
  // Metadata goes to the diagnostic stream when the CSV is on stdout.
  EXPECT_NE(r.err.find("\"command\":\"fisher-scan\""), std::string::npos);
}

TEST(Cli, FisherScanDegenerateGrid) {
  const auto r = run("fisher-scan --n-photons 4 --eta 0.6 --chi-min 1 --chi-max 1.5 --chi-step 5");
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string line;
  int rows = 0;
  std::getline(in, line);
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 1);
}

TEST(Cli, EvaluateSinglePhoton) {
  const auto r = run("evaluate --n1 1 --eta 0.6 --method exact");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rep = json::parse(r.out).at("report");
  EXPECT_NEAR(rep.at("mu").get<double>(), 0.3, 1e-12);
  EXPECT_EQ(rep.at("method"), "exact");
  EXPECT_TRUE(rep.at("mc_std_error").is_null());
}

TEST(Cli, EvaluateSevenPlusOnePinned) {
  const auto r = run("evaluate --n1 7 --n2 1 --chi2 1.7 --eta 0.6 --method speedup");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rep = json::parse(r.out).at("report");
  EXPECT_NEAR(rep.at("holevo_variance").get<double>(), kSevenPlusOneVariance, 1e-9);
  EXPECT_EQ(rep.at("branches_evaluated"), 255 * 6);
}

TEST(Cli, EvaluateGuard) {
  const auto r = run("evaluate --n1 2 --n2 2 --chi2 1.8 --n4 6 --chi4 1.3 --eta 0.6 --method exact");
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("guard"), std::string::npos);
}

TEST(Cli, EvaluateMonteCarloIsSeeded) {
  const auto a = run("--seed 9 evaluate --n1 2 --eta 0.6 --method mc --trials 2000");
  const auto b = run("--seed 9 evaluate --n1 2 --eta 0.6 --method mc --trials 2000");
  ASSERT_EQ(a.code, 0) << a.err;
  const auto ja = json::parse(a.out);
  const auto jb = json::parse(b.out);
  EXPECT_EQ(ja.at("report").at("mu"), jb.at("report").at("mu"));
  EXPECT_EQ(ja.at("report").at("mc_std_error"), jb.at("report").at("mc_std_error"));
  EXPECT_EQ(ja.at("seed"), 9);
}

TEST(Cli, OptimizeSmallInstance) {
  const auto csv = scratch_dir() / "pareto.csv";
  const auto r = run("optimize --n 3 --eta 1.0 --chi-step 0.5 --csv " + csv.string());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  const auto sql = run("evaluate --n1 3 --eta 1.0 --method exact");
  const double baseline = json::parse(sql.out).at("report").at("holevo_variance").get<double>();
  EXPECT_LE(j.at("result").at("best_variance").get<double>(), baseline + 1e-12);
  const auto text = slurp(csv);
  EXPECT_EQ(text.substr(0, text.find('\n')), "n1,n2,chi2,n4,chi4,eta,mu,holevo_variance,branches,method");
}

TEST(Cli, OptimizeCsvFormatWritesSidecar) {
  const auto out = scratch_dir() / "opt.csv";
  const auto r = run("--format csv --output " + out.string() + " optimize --n 2 --eta 0.6 --chi-step 0.5");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto meta = json::parse(slurp(out.string() + ".meta.json"));
  EXPECT_EQ(meta.at("command"), "optimize");
  EXPECT_EQ(slurp(out).substr(0, 6), "n1,n2,");
}

TEST(Cli, ConfigFileWithFlagOverride) {
  const auto cfg = scratch_dir() / "cfg.json";
  std::ofstream(cfg) << R"({"evaluate": {"n1": 1, "eta": 0.5, "method": "exact"}})";
  const auto a = run("--config " + cfg.string() + " evaluate");
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_NEAR(json::parse(a.out).at("report").at("mu").get<double>(), 0.25, 1e-12);
  const auto b = run("--config " + cfg.string() + " evaluate --eta 0.8");
  ASSERT_EQ(b.code, 0) << b.err;
  const auto jb = json::parse(b.out);
  EXPECT_NEAR(jb.at("report").at("mu").get<double>(), 0.4, 1e-12);
  EXPECT_EQ(jb.at("config").at("eta"), 0.8);
}

TEST(Cli, RerunsHaveIdenticalPayload) {
  auto a = json::parse(run("evaluate --n1 3 --n2 1 --chi2 1.7 --eta 0.6").out);
  auto b = json::parse(run("evaluate --n1 3 --n2 1 --chi2 1.7 --eta 0.6").out);
  for (auto* j : {&a, &b}) {
    j->erase("wall_time_ms");
    j->at("report").erase("wall_time_ms");
  }
  EXPECT_EQ(a, b);
}

TEST(Cli, Version) {
  const auto r = run("--version");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("0.1.0"), std::string::npos);
}

}  // namespace
