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

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "dpdg/graph_model.h"

namespace dpdg {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / "dpdg_cli_test";
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    // 60 nodes with a gender and an age attribute.
    const int n = 60;
    std::mt19937_64 rng(5);
    std::bernoulli_distribution coin(0.5);
    std::uniform_int_distribution<int> age(25, 65);
    std::vector<int> g(n), a(n);
    std::ofstream attrs(dir_ / "attrs.csv");
    attrs << "id,gender,age\n";
    for (int i = 0; i < n; ++i) {
      g[i] = coin(rng);
      a[i] = age(rng);
      attrs << "n" << i << ',' << (g[i] ? "f" : "m") << ',' << a[i] << '\n';
    }
    const CovariateSet covs(n, 2, [&](int i, int j) {
      return std::vector<double>{g[i] == g[j] ? 1.0 : -1.0,
                                 std::abs(a[i] - a[j]) / 10.0};
    });
    const ModelParams truth(Vector::Zero(n), Vector::Zero(n), Vector{{0.5, -0.3}});
    std::ofstream edges(dir_ / "edges.csv");
    edges << "src,dst\n";
    for (const auto& [i, j] : SampleGraph(truth, covs, 3).Edges()) {
      edges << 'n' << i << ",n" << j << '\n';
    }
    std::ofstream(dir_ / "schema.json")
        << R"({"attributes": [{"name": "gender", "kind": "categorical"},
                              {"name": "age", "kind": "continuous"}]})";
    std::ofstream(dir_ / "scenario.json")
        << R"({"n": 30, "L": "zero", "epsilon": "two", "reps": 12, "seed": 4})";
  }
  static void TearDownTestSuite() { fs::remove_all(dir_); }

  static int Run(const std::string& args, const std::string& stdout_name = "") {
    std::string cmd = std::string(DPDG_CLI_PATH) + " " + args;
    cmd += stdout_name.empty() ? " > /dev/null" : " > " + (dir_ / stdout_name).string();
    cmd += " 2> " + (dir_ / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  static std::string P(const std::string& name) { return (dir_ / name).string(); }

  static fs::path dir_;
};

fs::path CliTest::dir_;

TEST_F(CliTest, ReleaseIsDeterministic) {
  const std::string args = "release --graph " + P("edges.csv") + " --epsilon 2 --seed 9";
  ASSERT_EQ(Run(args, "r1.json"), 0);
  ASSERT_EQ(Run(args, "r2.json"), 0);
  EXPECT_EQ(Slurp(P("r1.json")), Slurp(P("r2.json")));
  const auto j = json::parse(Slurp(P("r1.json")));
  EXPECT_EQ(j["d_tilde"].size(), 60u);
  EXPECT_EQ(j["seed"], 9);
  ASSERT_EQ(Run("release --graph " + P("edges.csv") + " --epsilon inf --seed 9", "r3.json"), 0);
  EXPECT_EQ(json::parse(Slurp(P("r3.json")))["epsilon"], "infinity");
}

TEST_F(CliTest, FitWritesReport) {
  const std::string args = "fit --graph " + P("edges.csv") + " --attrs " + P("attrs.csv") +
                           " --schema " + P("schema.json") + " --seed 1 --no-noise";
  ASSERT_EQ(Run(args, "f1.json"), 0) << Slurp(P("stderr.txt"));
  ASSERT_EQ(Run(args, "f2.json"), 0);
  EXPECT_EQ(Slurp(P("f1.json")), Slurp(P("f2.json")));
  const auto j = json::parse(Slurp(P("f1.json")));
  EXPECT_TRUE(j["exists"].get<bool>());
  ASSERT_EQ(j["covariates"].size(), 2u);
  EXPECT_EQ(j["covariates"][0]["name"], "gender");
  for (const char* key : {"gamma_hat", "gamma_bc", "se", "p_value"}) {
    EXPECT_TRUE(j["covariates"][1][key].is_number()) << key;
  }
  EXPECT_EQ(j["nodes"].size(), j["n"].get<std::size_t>());
  EXPECT_TRUE(j["nodes"].back()["se_beta"].is_null());
  EXPECT_TRUE(j["privacy"].contains("s_n_sq"));
}

TEST_F(CliTest, NoisyFitReportsPrivacyOnStderr) {
  const std::string args = "fit --graph " + P("edges.csv") + " --attrs " + P("attrs.csv") +
                           " --schema " + P("schema.json") + " --seed 3 --epsilon 4";
  const int code = Run(args, "f3.json");
  EXPECT_TRUE(code == 0 || code == 3) << code;
  EXPECT_NE(Slurp(P("stderr.txt")).find("epsilon="), std::string::npos);
}

TEST_F(CliTest, NonexistenceExitsThree) {
  const std::string args = "fit --graph " + P("edges.csv") + " --attrs " + P("attrs.csv") +
                           " --schema " + P("schema.json") + " --seed 3 --epsilon 0.01";
  ASSERT_EQ(Run(args, "f4.json"), 3);
  const auto j = json::parse(Slurp(P("f4.json")));
  EXPECT_FALSE(j["exists"].get<bool>());
  EXPECT_TRUE(j.contains("reason"));
}

TEST_F(CliTest, InputErrorsExitTwo) {
  EXPECT_EQ(Run(""), 2);
  EXPECT_EQ(Run("frobnicate"), 2);
  EXPECT_EQ(Run("release --graph " + P("edges.csv") + " --epsilon 2"), 2);
  EXPECT_EQ(Run("release --graph " + P("edges.csv") + " --epsilon -1 --seed 1"), 2);
  EXPECT_EQ(Run("fit --graph " + P("edges.csv") + " --attrs " + P("attrs.csv") +
                " --schema " + P("missing.json") + " --seed 1"),
            2);
  std::ofstream(dir_ / "loop.csv") << "src,dst\nn1,n1\n";
  EXPECT_EQ(Run("release --graph " + P("loop.csv") + " --epsilon 2 --seed 1"), 2);
  std::ofstream(dir_ / "bad.json") << R"({"n": 30, "colour": "red"})";
  EXPECT_EQ(Run("simulate --config " + P("bad.json") + " --out " + P("bad_out")), 2);
  EXPECT_EQ(Run("--help"), 0);
}

TEST_F(CliTest, SimulateIsByteIdentical) {
  ASSERT_EQ(Run("simulate --config " + P("scenario.json") + " --out " + P("s1")), 0)
      << Slurp(P("stderr.txt"));
  ASSERT_EQ(Run("simulate --config " + P("scenario.json") + " --out " + P("s2")), 0);
  int files = 0;
  for (const auto& e : fs::directory_iterator(P("s1"))) {
    const auto other = fs::path(P("s2")) / e.path().filename();
    ASSERT_TRUE(fs::exists(other)) << other;
    EXPECT_EQ(Slurp(e.path()), Slurp(other)) << e.path().filename();
    ++files;
  }
  EXPECT_GE(files, 3);
  ASSERT_EQ(Run("report --in " + P("s1"), "report.txt"), 0);
  EXPECT_NE(Slurp(P("report.txt")).find("gamma_bc"), std::string::npos);
}

TEST_F(CliTest, ConvertLazega) {
  std::ofstream(dir_ / "ELwork.dat") << "0 1 1\n1 0 0\n1 1 0\n";
  std::ofstream(dir_ / "ELattr.dat") << "1 1 1 1 31 64 1 1\n2 1 1 1 32 62 2 1\n"
                                        "3 2 2 2 13 67 1 3\n";
  ASSERT_EQ(Run("convert-lazega --work " + P("ELwork.dat") + " --attr " + P("ELattr.dat") +
                " --out " + P("lz")),
            0);
  EXPECT_TRUE(fs::exists(fs::path(P("lz")) / "schema.json"));
  EXPECT_EQ(Run("convert-lazega --work " + P("nope.dat") + " --attr " + P("ELattr.dat") +
                " --out " + P("lz2")),
            2);
}

}  // namespace
}  // namespace dpdg
