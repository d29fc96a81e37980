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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "dpdg/errors.h"
#include "dpdg/inference.h"
#include "dpdg/random.h"
#include "dpdg/stats.h"

namespace dpdg {
namespace {

constexpr double kZ95 = 1.959963984540054;
constexpr double kZ99 = 2.5758293035489004;

constexpr std::array<Statistic, 3> kStatistics = {
    Statistic::kXi, Statistic::kZeta, Statistic::kEta};

}  // namespace

std::string_view ToString(LKind kind) {
  switch (kind) {
    case LKind::kZero:
      return "zero";
    case LKind::kLogLogN:
      return "loglogn";
    case LKind::kSqrtLogN:
      return "sqrtlogn";
    case LKind::kLogN:
      return "logn";
  }
  return "unknown";
}

std::string_view ToString(EpsilonKind kind) {
  switch (kind) {
    case EpsilonKind::kTwo:
      return "two";
    case EpsilonKind::kLogNOverN4:
      return "logn_over_n4";
    case EpsilonKind::kLogNOverN2:
      return "logn_over_n2";
    case EpsilonKind::kInfinity:
      return "infinity";
  }
  return "unknown";
}

std::string_view ToString(Statistic stat) {
  switch (stat) {
    case Statistic::kXi:
      return "xi";
    case Statistic::kZeta:
      return "zeta";
    case Statistic::kEta:
      return "eta";
  }
  return "unknown";
}

LKind ParseLKind(std::string_view name) {
  for (LKind k : {LKind::kZero, LKind::kLogLogN, LKind::kSqrtLogN, LKind::kLogN}) {
    if (name == ToString(k)) return k;
  }
  throw ParseError("unknown L kind '" + std::string(name) + "'");
}

EpsilonKind ParseEpsilonKind(std::string_view name) {
  if (name == "logn_n4") return EpsilonKind::kLogNOverN4;
  if (name == "logn_n2") return EpsilonKind::kLogNOverN2;
  for (EpsilonKind k : {EpsilonKind::kTwo, EpsilonKind::kLogNOverN4,
                        EpsilonKind::kLogNOverN2, EpsilonKind::kInfinity}) {
    if (name == ToString(k)) return k;
  }
  throw ParseError("unknown epsilon kind '" + std::string(name) + "'");
}

double Scenario::L() const {
  const double logn = std::log(static_cast<double>(n));
  switch (l_kind) {
    case LKind::kZero:
      return 0.0;
    case LKind::kLogLogN:
      return std::log(logn);
    case LKind::kSqrtLogN:
      return std::sqrt(logn);
    case LKind::kLogN:
      return logn;
  }
  return 0.0;
}

double Scenario::Epsilon() const {
  const double logn = std::log(static_cast<double>(n));
  switch (epsilon_kind) {
    case EpsilonKind::kTwo:
      return 2.0;
    case EpsilonKind::kLogNOverN4:
      return logn / std::pow(static_cast<double>(n), 0.25);
    case EpsilonKind::kLogNOverN2:
      return logn / std::sqrt(static_cast<double>(n));
    case EpsilonKind::kInfinity:
      return std::numeric_limits<double>::infinity();
  }
  return 2.0;
}

ModelParams Scenario::Truth() const {
  const double level = L();
  Vector alpha(n);
  for (int i = 0; i < n; ++i) alpha[i] = (n - 1 - i) * level / (n - 1);
  // alpha*_n is already 0, so beta* = alpha* satisfies beta*_n = 0.
  Vector beta = alpha;
  return ModelParams(std::move(alpha), std::move(beta), gamma_true);
}

std::vector<std::pair<int, int>> Scenario::ResolvedPairs() const {
  if (!pairs.empty()) return pairs;
  return {{1, 2}, {n / 2, n / 2 + 1}, {n - 1, n}};
}

void Scenario::Validate() const {
  if (n < 4) throw ParameterError("scenario needs n >= 4");
  if (reps < 1) throw ParameterError("scenario needs reps >= 1");
  if (gamma_true.size() != 2) {
    throw ParameterError("simulation covariates are 2-dimensional");
  }
  for (const auto& [i, j] : ResolvedPairs()) {
    if (i < 1 || j < 1 || i > n || j > n || i == j) {
      throw ParameterError("pair (" + std::to_string(i) + ", " +
                           std::to_string(j) + ") out of range");
    }
  }
}

CovariateSet GenerateCovariates(int n, std::uint64_t seed) {
  Rng rng = MakeRng(seed, Stream::kCovariates);
  std::bernoulli_distribution sign(0.3);
  std::gamma_distribution<double> shape2(2.0, 1.0);
  std::vector<double> x1(n);
  std::vector<double> x2(n);
  for (int i = 0; i < n; ++i) {
    x1[i] = sign(rng) ? 1.0 : -1.0;
    // Beta(2, 2) as G1 / (G1 + G2) with G ~ Gamma(2, 1).
    const double g1 = shape2(rng);
    const double g2 = shape2(rng);
    x2[i] = g1 / (g1 + g2);
  }
  return CovariateSet(n, 2, [&](int i, int j) {
    return std::vector<double>{x1[i] * x1[j], std::abs(x2[i] - x2[j])};
  });
}

ReplicationRecord RunReplication(const Scenario& s, const SolverConfig& cfg,
                                 int rep) {
  const std::uint64_t seed = s.base_seed + static_cast<std::uint64_t>(rep);
  const ModelParams truth = s.Truth();
  CovariateSet covs =
      GenerateCovariates(s.n, s.fixed_covariates ? s.base_seed : seed);
  DirectedGraph graph = SampleGraph(truth, covs, seed);
  const PrivacyBudget budget =
      PrivacyBudget::FromEpsilon(s.Epsilon(), s.alpha_formula);
  NoisyDegrees noisy = ReleaseBidegree(graph, budget, seed);
  const MomentSystem sys(std::move(graph), std::move(covs), std::move(noisy));

  ReplicationRecord rec;
  FitResult fit;
  try {
    fit = Fit(sys, LogitStart(sys.noisy(), sys.p()), cfg);
  } catch (const DegeneracyError&) {
    rec.degenerate = true;
    rec.reason = Nonexistence::kDivergence;
    return rec;
  }
  rec.reason = fit.reason;
  if (!fit.exists) return rec;

  const ModelParams est = *fit.params();
  GammaInference ginf;
  try {
    ginf = GammaInferenceFor(sys, fit, budget, s.bias_method);
    const Vector bias = s.bias_method == BiasMethod::kProjected
                            ? ProjectedBiasTerm(sys, truth, budget)
                            : BiasTerm(sys, truth);
    const SchurMatrix h_true = sys.SchurH(truth);
    rec.bias_at_truth = -std::sqrt(static_cast<double>(h_true.n_pairs)) *
                        h_true.h.llt().solve(bias);
  } catch (const DegeneracyError&) {
    rec.degenerate = true;
    rec.reason = Nonexistence::kDivergence;
    return rec;
  }
  rec.exists = true;
  const ThetaInference tinf = ThetaSe(sys.JacobianV(est), budget);
  for (const auto& [i, j] : s.ResolvedPairs()) {
    const StandardizedPair z = ZStatistics(est, truth, tinf, i - 1, j - 1);
    rec.z.push_back({z.xi, z.zeta, z.eta});
    rec.sd.push_back({z.sd_xi, z.sd_zeta, z.sd_eta});
  }
  rec.gamma_hat = ginf.gamma_hat;
  rec.gamma_bc = ginf.gamma_bc;
  rec.se_gamma = ginf.se_gamma;
  rec.alpha_first_error = est.alpha()[0] - truth.alpha()[0];
  rec.alpha_first_var = tinf.se_alpha[0] * tinf.se_alpha[0];
  return rec;
}

int SimulationThreads() {
  if (const char* env = std::getenv("DPDG_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::vector<double> ScenarioReport::Values(Statistic stat,
                                           std::size_t pair) const {
  std::vector<double> out;
  for (const auto& rec : records) {
    if (rec.exists) out.push_back(rec.z.at(pair)[static_cast<int>(stat)]);
  }
  return out;
}

ScenarioReport RunScenario(const Scenario& s, const SolverConfig& cfg) {
  s.Validate();
  cfg.Validate();
  ScenarioReport report;
  report.scenario = s;
  report.epsilon = s.Epsilon();
  report.L = s.L();
  report.pairs = s.ResolvedPairs();
  report.records.resize(s.reps);

  const int workers = std::max(1, std::min(SimulationThreads(), s.reps));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto work = [&] {
    for (int rep = next++; rep < s.reps; rep = next++) {
      try {
        report.records[rep] = RunReplication(s, cfg, rep);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  const std::size_t num_pairs = report.pairs.size();
  report.intervals.assign(num_pairs, {});
  const int p = static_cast<int>(s.gamma_true.size());
  std::vector<GammaSummary> hat(p), bc(p);
  for (const auto& rec : report.records) {
    if (!rec.exists) continue;
    ++report.existing;
    for (std::size_t k = 0; k < num_pairs; ++k) {
      for (int st = 0; st < 3; ++st) {
        IntervalSummary& sum = report.intervals[k][st];
        const double z = std::abs(rec.z[k][st]);
        sum.coverage_pct += z <= kZ95 ? 1.0 : 0.0;
        sum.coverage99_pct += z <= kZ99 ? 1.0 : 0.0;
        sum.mean_length += 2.0 * kZ95 * rec.sd[k][st];
      }
    }
    for (int c = 0; c < p; ++c) {
      const double truth = s.gamma_true[c];
      const double half = kZ95 * rec.se_gamma[c];
      for (auto* sum : {&hat[c], &bc[c]}) {
        const double est = sum == &hat[c] ? rec.gamma_hat[c] : rec.gamma_bc[c];
        sum->coverage_pct += std::abs(est - truth) <= half ? 1.0 : 0.0;
        sum->mean_length += 2.0 * half;
        sum->mean_abs_bias += std::abs(est - truth);
        sum->mean_bias += est - truth;
      }
    }
  }
  report.nonexist_pct = 100.0 * (s.reps - report.existing) / s.reps;
  if (report.existing > 0) {
    const double m = report.existing;
    for (auto& row : report.intervals) {
      for (auto& sum : row) {
        sum.coverage_pct *= 100.0 / m;
        sum.coverage99_pct *= 100.0 / m;
        sum.mean_length /= m;
      }
    }
    for (int c = 0; c < p; ++c) {
      for (auto* sum : {&hat[c], &bc[c]}) {
        sum->coverage_pct *= 100.0 / m;
        sum->mean_length /= m;
        sum->mean_abs_bias /= m;
        sum->mean_bias /= m;
      }
    }
  }
  for (int c = 0; c < p; ++c) {
    hat[c].estimator = "gamma_hat";
    bc[c].estimator = "gamma_bc";
    hat[c].coordinate = bc[c].coordinate = c + 1;
    report.gamma.push_back(hat[c]);
    report.gamma.push_back(bc[c]);
  }
  return report;
}

std::vector<std::pair<double, double>> QqPairs(std::vector<double> values) {
  if (values.size() < 2) {
    throw ValidationError("QQ export needs at least two values");
  }
  std::sort(values.begin(), values.end());
  const double m = static_cast<double>(values.size());
  std::vector<std::pair<double, double>> out;
  out.reserve(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    out.emplace_back(NormalQuantile((k + 0.5) / m), values[k]);
  }
  return out;
}

std::vector<std::pair<double, double>> ExportQq(const ScenarioReport& report,
                                                Statistic stat,
                                                std::size_t pair) {
  if (pair >= report.pairs.size()) throw DomainError("QQ pair index out of range");
  return QqPairs(report.Values(stat, pair));
}

namespace {

std::string PairLabel(Statistic stat, const std::pair<int, int>& pair) {
  return std::string(ToString(stat)) + "_" + std::to_string(pair.first) + "_" +
         std::to_string(pair.second);
}

}  // namespace

void WriteCoverageCsv(const ScenarioReport& report, std::ostream& out) {
  out << "n,L,epsilon,pair,coverage_pct,ci_len,nonexist_pct\n";
  out << std::fixed;
  for (std::size_t k = 0; k < report.pairs.size(); ++k) {
    for (Statistic stat : kStatistics) {
      const IntervalSummary& sum = report.intervals[k][static_cast<int>(stat)];
      out << report.scenario.n << ',' << ToString(report.scenario.l_kind) << ','
          << ToString(report.scenario.epsilon_kind) << ','
          << PairLabel(stat, report.pairs[k]) << ',' << std::setprecision(2)
          << sum.coverage_pct << ',' << std::setprecision(4) << sum.mean_length
          << ',' << std::setprecision(2) << report.nonexist_pct << '\n';
    }
  }
}

void WriteGammaCsv(const ScenarioReport& report, std::ostream& out) {
  out << "estimator,coordinate,coverage,length,mean_abs_bias,mean_bias\n";
  out << std::fixed;
  for (const GammaSummary& g : report.gamma) {
    out << g.estimator << ',' << g.coordinate << ',' << std::setprecision(2)
        << g.coverage_pct << ',' << std::setprecision(4) << g.mean_length << ','
        << g.mean_abs_bias << ',' << g.mean_bias << '\n';
  }
}

void WriteQqCsv(const std::vector<std::pair<double, double>>& qq,
                std::ostream& out) {
  out << "theoretical,empirical\n";
  out << std::setprecision(10);
  for (const auto& [t, e] : qq) out << t << ',' << e << '\n';
}

void WriteReportFiles(const ScenarioReport& report,
                      const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const std::string& name) {
    std::ofstream f(dir / name);
    if (!f) throw ValidationError("cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open("coverage.csv");
    WriteCoverageCsv(report, f);
  }
  {
    auto f = open("gamma.csv");
    WriteGammaCsv(report, f);
  }
  if (report.existing < 2) return;
  for (std::size_t k = 0; k < report.pairs.size(); ++k) {
    for (Statistic stat : kStatistics) {
      auto f = open("qq_" + PairLabel(stat, report.pairs[k]) + ".csv");
      WriteQqCsv(ExportQq(report, stat, k), f);
    }
  }
}

}  // namespace dpdg
