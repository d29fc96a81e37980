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

// Monte-Carlo harness for coverage studies of the private estimator.
//
// Truth: alpha*_{i+1} = (n-1-i) L / (n-1), beta*_i = alpha*_i (i < n),
// beta*_n = 0. Node attributes x_i1 in {1, -1} with P(1) = 0.3 and
// x_i2 ~ Beta(2, 2); Z_ij = (x_i1 x_j1, |x_i2 - x_j2|).

#ifndef DPDG_SIM_HARNESS_H_
#define DPDG_SIM_HARNESS_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dpdg/dp_release.h"
#include "dpdg/graph_model.h"
#include "dpdg/inference.h"
#include "dpdg/solver.h"

namespace dpdg {

enum class LKind { kZero, kLogLogN, kSqrtLogN, kLogN };
enum class EpsilonKind { kTwo, kLogNOverN4, kLogNOverN2, kInfinity };

std::string_view ToString(LKind kind);
std::string_view ToString(EpsilonKind kind);
// Accepts the names produced by ToString plus the short config aliases
// ("logn_n4", "logn_n2"). Throws ParseError on anything else.
LKind ParseLKind(std::string_view name);
EpsilonKind ParseEpsilonKind(std::string_view name);

struct Scenario {
  int n = 100;
  LKind l_kind = LKind::kZero;
  EpsilonKind epsilon_kind = EpsilonKind::kTwo;
  Vector gamma_true = Vector{{1.0, 1.5}};
  int reps = 200;
  std::uint64_t base_seed = 1;
  // 1-based node pairs; empty means (1,2), (n/2, n/2+1), (n-1, n).
  std::vector<std::pair<int, int>> pairs;
  bool fixed_covariates = false;
  AlphaFormula alpha_formula = AlphaFormula::kConsistent;
  BiasMethod bias_method = BiasMethod::kProjected;

  double L() const;
  double Epsilon() const;
  ModelParams Truth() const;
  std::vector<std::pair<int, int>> ResolvedPairs() const;
  // Throws ParameterError on an invalid scenario.
  void Validate() const;
};

// Simulation covariates for n nodes; only the first two columns of gamma are
// meaningful, so p is always 2.
CovariateSet GenerateCovariates(int n, std::uint64_t seed);

enum class Statistic { kXi = 0, kZeta = 1, kEta = 2 };
std::string_view ToString(Statistic stat);

struct ReplicationRecord {
  bool exists = false;
  Nonexistence reason = Nonexistence::kNone;
  bool degenerate = false;  // H lost positive definiteness
  // Per pair: standardized values and standard deviations for xi/zeta/eta.
  std::vector<std::array<double, 3>> z;
  std::vector<std::array<double, 3>> sd;
  Vector gamma_hat;
  Vector gamma_bc;
  Vector se_gamma;
  Vector bias_at_truth;   // predicted E[gamma_hat] - gamma at the truth
  double alpha_first_error = 0.0;  // alpha_hat_1 - alpha*_1
  double alpha_first_var = 0.0;    // plug-in variance of alpha_hat_1
};

struct IntervalSummary {
  double coverage_pct = 0.0;    // 95% intervals
  double coverage99_pct = 0.0;  // 99% intervals
  double mean_length = 0.0;     // 95% interval length
};

struct GammaSummary {
  std::string estimator;  // "gamma_hat" or "gamma_bc"
  int coordinate = 0;     // 1-based
  double coverage_pct = 0.0;
  double mean_length = 0.0;
  double mean_abs_bias = 0.0;  // mean |estimate - truth|
  double mean_bias = 0.0;      // mean (estimate - truth)
};

struct ScenarioReport {
  Scenario scenario;
  double epsilon = 0.0;
  double L = 0.0;
  int existing = 0;
  double nonexist_pct = 0.0;
  std::vector<std::pair<int, int>> pairs;  // 1-based
  // [pair][stat]
  std::vector<std::array<IntervalSummary, 3>> intervals;
  std::vector<GammaSummary> gamma;
  std::vector<ReplicationRecord> records;

  // Standardized values of `stat` at pair index `pair` over existing reps.
  std::vector<double> Values(Statistic stat, std::size_t pair) const;
};

// Runs every replication (in parallel, see SimulationThreads) and aggregates
// in replication order. Nonexistence is counted, never thrown.
ScenarioReport RunScenario(const Scenario& s, const SolverConfig& cfg);

// One replication with seed base_seed + rep.
ReplicationRecord RunReplication(const Scenario& s, const SolverConfig& cfg,
                                 int rep);

// Worker count from DPDG_THREADS, else the hardware concurrency.
int SimulationThreads();

// (theoretical, empirical) quantile pairs with plotting positions
// (k - 0.5) / m. Throws ValidationError for fewer than two values.
std::vector<std::pair<double, double>> QqPairs(std::vector<double> values);
std::vector<std::pair<double, double>> ExportQq(const ScenarioReport& report,
                                                Statistic stat,
                                                std::size_t pair);

// CSV outputs. WriteReportFiles writes coverage.csv, gamma.csv and one
// qq_<stat>_<i>_<j>.csv per statistic and pair with at least two values.
void WriteCoverageCsv(const ScenarioReport& report, std::ostream& out);
void WriteGammaCsv(const ScenarioReport& report, std::ostream& out);
void WriteQqCsv(const std::vector<std::pair<double, double>>& qq,
                std::ostream& out);
void WriteReportFiles(const ScenarioReport& report,
                      const std::filesystem::path& dir);

}  // namespace dpdg

#endif  // DPDG_SIM_HARNESS_H_
