// Copyright 2026 The dpdg Authors
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

#include "dpdg/sim_harness.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "dpdg/errors.h"
#include "dpdg/stats.h"

namespace dpdg {
namespace {

TEST(CovariateTest, RangesAndMoments) {
  const int n = 2000;
  const auto covs = GenerateCovariates(n, 17);
  double sum1 = 0.0, sum2 = 0.0;
  long pairs = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double z1 = covs.z(i, j, 0), z2 = covs.z(i, j, 1);
      ASSERT_TRUE(z1 == 1.0 || z1 == -1.0);
      ASSERT_GE(z2, 0.0);
      ASSERT_LE(z2, 1.0);
      ASSERT_EQ(z1, covs.z(j, i, 0));
      ASSERT_EQ(z2, covs.z(j, i, 1));
      sum1 += z1;
      sum2 += z2;
      ++pairs;
    }
  }
  // E[x_i x_j] = (0.3 - 0.7)^2 and E|X - Y| = 9/35 for X, Y ~ Beta(2, 2).
  EXPECT_NEAR(sum1 / pairs, 0.16, 0.06);
  EXPECT_NEAR(sum2 / pairs, 9.0 / 35.0, 0.02);
}

TEST(CovariateTest, DeterministicInSeed) {
  const auto a = GenerateCovariates(30, 5), b = GenerateCovariates(30, 5);
  const auto c = GenerateCovariates(30, 6);
  bool differs = false;
  for (int i = 0; i < 30; ++i) {
    for (int j = 0; j < 30; ++j) {
      if (i == j) continue;
      EXPECT_EQ(a.z(i, j, 1), b.z(i, j, 1));
      differs |= a.z(i, j, 1) != c.z(i, j, 1);
    }
  }
  EXPECT_TRUE(differs);
}

TEST(ScenarioTest, TruthLayout) {
  Scenario s;
  s.n = 11;
  s.l_kind = LKind::kLogN;
  const auto t = s.Truth();
  EXPECT_NEAR(t.alpha()[0], std::log(11.0), 1e-15);
  EXPECT_EQ(t.alpha()[10], 0.0);
  EXPECT_NEAR(t.alpha()[5], std::log(11.0) / 2, 1e-15);
  EXPECT_EQ(t.alpha(), t.beta());
  EXPECT_EQ(t.gamma(), (Vector{{1.0, 1.5}}));
}

TEST(ScenarioTest, LevelsAndBudgets) {
  Scenario s;
  s.n = 100;
  const double logn = std::log(100.0);
  const std::pair<LKind, double> levels[] = {{LKind::kZero, 0.0},
                                             {LKind::kLogLogN, std::log(logn)},
                                             {LKind::kSqrtLogN, std::sqrt(logn)},
                                             {LKind::kLogN, logn}};
  for (auto [kind, value] : levels) {
    s.l_kind = kind;
    EXPECT_DOUBLE_EQ(s.L(), value);
  }
  s.epsilon_kind = EpsilonKind::kLogNOverN4;
  EXPECT_DOUBLE_EQ(s.Epsilon(), logn / std::pow(100.0, 0.25));
  s.epsilon_kind = EpsilonKind::kLogNOverN2;
  EXPECT_DOUBLE_EQ(s.Epsilon(), logn / 10.0);
  s.epsilon_kind = EpsilonKind::kInfinity;
  EXPECT_TRUE(std::isinf(s.Epsilon()));
}

TEST(ScenarioTest, KindNames) {
  EXPECT_EQ(ParseLKind("loglogn"), LKind::kLogLogN);
  EXPECT_EQ(ParseEpsilonKind("logn_n4"), EpsilonKind::kLogNOverN4);
  EXPECT_EQ(ParseEpsilonKind(ToString(EpsilonKind::kLogNOverN2)), EpsilonKind::kLogNOverN2);
  EXPECT_THROW(ParseLKind("huge"), ParseError);
  EXPECT_THROW(ParseEpsilonKind(""), ParseError);
}

TEST(ScenarioTest, DefaultPairsAndValidation) {
  Scenario s;
  s.n = 100;
  EXPECT_EQ(s.ResolvedPairs(),
            (std::vector<std::pair<int, int>>{{1, 2}, {50, 51}, {99, 100}}));
  s.pairs = {{3, 3}};
  EXPECT_THROW(s.Validate(), ParameterError);
  s.pairs = {{1, 101}};
  EXPECT_THROW(s.Validate(), ParameterError);
  s.pairs.clear();
  s.reps = 0;
  EXPECT_THROW(s.Validate(), ParameterError);
}

Scenario Small() {
  Scenario s;
  s.n = 40;
  s.reps = 40;
  s.base_seed = 9;
  return s;
}

std::string CoverageText(const ScenarioReport& r) {
  std::ostringstream os;
  WriteCoverageCsv(r, os);
  WriteGammaCsv(r, os);
  return os.str();
}

TEST(RunScenarioTest, ReproducibleAcrossThreadCounts) {
  const Scenario s = Small();
  setenv("DPDG_THREADS", "1", 1);
  const auto a = RunScenario(s, SolverConfig{});
  setenv("DPDG_THREADS", "3", 1);
  const auto b = RunScenario(s, SolverConfig{});
  unsetenv("DPDG_THREADS");
  EXPECT_EQ(CoverageText(a), CoverageText(b));
  for (int r = 0; r < s.reps; ++r) {
    EXPECT_EQ(a.records[r].exists, b.records[r].exists);
    EXPECT_EQ(a.records[r].gamma_hat, b.records[r].gamma_hat);
  }
}

TEST(RunScenarioTest, SummaryInvariants) {
  const auto r = RunScenario(Small(), SolverConfig{});
  int existing = 0;
  for (const auto& rec : r.records) existing += rec.exists;
  EXPECT_EQ(existing, r.existing);
  EXPECT_NEAR(r.nonexist_pct + 100.0 * r.existing / r.scenario.reps, 100.0, 1e-9);
  ASSERT_GT(r.existing, 0);
  for (const auto& row : r.intervals) {
    for (const auto& sum : row) {
      EXPECT_GE(sum.coverage99_pct, sum.coverage_pct);
      EXPECT_LE(sum.coverage99_pct, 100.0);
      EXPECT_GT(sum.mean_length, 0.0);
    }
  }
  ASSERT_EQ(r.gamma.size(), 4u);
  EXPECT_EQ(r.gamma[0].estimator, "gamma_hat");
  EXPECT_EQ(r.gamma[1].estimator, "gamma_bc");
  // Both estimators share the same interval width.
  EXPECT_DOUBLE_EQ(r.gamma[0].mean_length, r.gamma[1].mean_length);
  EXPECT_GE(r.gamma[0].mean_abs_bias, std::abs(r.gamma[0].mean_bias));
}

TEST(RunScenarioTest, NoiselessCoverageIsNominal) {
  Scenario s;
  s.n = 60;
  s.reps = 100;
  s.epsilon_kind = EpsilonKind::kInfinity;
  s.base_seed = 300;
  const auto r = RunScenario(s, SolverConfig{});
  EXPECT_EQ(r.existing, s.reps);
  for (const auto& row : r.intervals) {
    EXPECT_GE(row[0].coverage_pct, 85.0);
    EXPECT_LE(row[0].coverage_pct, 100.0);
  }
}

TEST(RunReplicationTest, MatchesScenarioRecord) {
  const Scenario s = Small();
  const auto r = RunScenario(s, SolverConfig{});
  const auto one = RunReplication(s, SolverConfig{}, 7);
  EXPECT_EQ(one.exists, r.records[7].exists);
  EXPECT_EQ(one.gamma_hat, r.records[7].gamma_hat);
}

TEST(QqTest, NormalSampleLiesOnDiagonal) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z;
  std::vector<double> v(2000);
  for (double& x : v) x = z(rng);
  EXPECT_LT(KolmogorovSmirnovNormal(v), 0.05);
  const auto qq = QqPairs(v);
  ASSERT_EQ(qq.size(), v.size());
  double worst = 0.0;
  for (std::size_t k = 0; k < qq.size(); ++k) {
    if (k > 0) {
      EXPECT_GE(qq[k].second, qq[k - 1].second);
    }
    if (k >= 20 && k + 20 < qq.size()) {
      worst = std::max(worst, std::abs(qq[k].first - qq[k].second));
    }
  }
  EXPECT_LT(worst, 0.25);
  EXPECT_NEAR(qq.front().first, NormalQuantile(0.25 / 1000), 1e-12);
}

TEST(QqTest, NeedsTwoValues) {
  EXPECT_THROW(QqPairs({1.0}), ValidationError);
  EXPECT_THROW(QqPairs({}), ValidationError);
  EXPECT_EQ(QqPairs({2.0, 1.0}).front().second, 1.0);
}

TEST(ReportFilesTest, WritesExpectedFiles) {
  const auto r = RunScenario(Small(), SolverConfig{});
  const auto dir = std::filesystem::temp_directory_path() / "dpdg_sim_harness_test";
  std::filesystem::remove_all(dir);
  WriteReportFiles(r, dir);
  std::ifstream cov(dir / "coverage.csv");
  std::string header;
  std::getline(cov, header);
  EXPECT_EQ(header, "n,L,epsilon,pair,coverage_pct,ci_len,nonexist_pct");
  int rows = 0;
  for (std::string line; std::getline(cov, line);) ++rows;
  EXPECT_EQ(rows, 9);
  EXPECT_TRUE(std::filesystem::exists(dir / "gamma.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "qq_xi_1_2.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "qq_eta_39_40.csv"));
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace dpdg
