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

// dpdg: private release and estimation for directed graphs with covariates.
//
//   dpdg release  --graph edges.csv --epsilon 2 --seed 7
//   dpdg fit      --graph edges.csv --attrs attrs.csv --schema schema.json
//                 --epsilon 2 --seed 7
//   dpdg simulate --config scenario.json --out results/
//   dpdg report   --in results/
//   dpdg convert-lazega --work ELwork.dat --attr ELattr.dat --out data/
//
// Exit codes: 0 ok, 2 bad input, 3 the estimate does not exist, 4 degenerate
// covariate information.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dpdg/dp_release.h"
#include "dpdg/errors.h"
#include "dpdg/inference.h"
#include "dpdg/io.h"
#include "dpdg/sim_harness.h"
#include "dpdg/solver.h"

namespace {

using nlohmann::json;
using namespace dpdg;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNonexistence = 3;
constexpr int kExitDegenerate = 4;

double ParseEpsilon(const std::string& s) {
  if (s == "inf" || s == "infinity") {
    return std::numeric_limits<double>::infinity();
  }
  double v = 0.0;
  std::size_t used = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || !(v > 0.0)) {
    throw ParameterError("epsilon must be positive, got '" + s + "'");
  }
  return v;
}

AlphaFormula ParseAlphaFormula(const std::string& s) {
  if (s == "consistent") return AlphaFormula::kConsistent;
  if (s == "literal") return AlphaFormula::kLiteral;
  throw ParameterError("unknown alpha formula '" + s + "'");
}

void LogBudget(const PrivacyBudget& b, int n) {
  std::fprintf(stderr, "dpdg: epsilon=%.6g alpha_n=%.6g kappa_n=%.6g s_n^2=%.6g (n=%d)\n",
               b.epsilon, b.alpha, b.kappa,
               b.noiseless() ? 0.0 : b.SumNoiseVariance(n), n);
}

void Emit(const json& j, const std::string& out) {
  const std::string text = j.dump(2) + "\n";
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw ValidationError("cannot write " + out);
  f << text;
}

json NullIfNan(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// ---------------------------------------------------------------------------

struct ReleaseArgs {
  std::string graph;
  std::string epsilon;
  std::uint64_t seed = 0;
  std::string alpha_formula = "consistent";
  std::string out;
};

int RunRelease(const ReleaseArgs& a) {
  const LoadedGraph lg = LoadGraph(a.graph);
  for (const auto& w : lg.warnings) std::cerr << "dpdg: warning: " << w << "\n";
  const PrivacyBudget budget = PrivacyBudget::FromEpsilon(
      ParseEpsilon(a.epsilon), ParseAlphaFormula(a.alpha_formula));
  LogBudget(budget, lg.graph.n());
  const NoisyDegrees noisy = ReleaseBidegree(lg.graph, budget, a.seed);
  json j = NoisyDegreesToJson(noisy, budget.epsilon, a.seed);
  j["ids"] = lg.ids;
  Emit(j, a.out);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct FitArgs {
  std::string graph;
  std::string attrs;
  std::string schema;
  std::string epsilon = "2";
  std::uint64_t seed = 0;
  bool no_noise = false;
  bool keep_isolates = false;
  std::string alpha_formula = "consistent";
  std::string bias_method = "projected";
  std::string out;
};

int RunFit(const FitArgs& a) {
  const AttributeSchema schema = LoadSchema(a.schema);
  const NodeAttributeTable attrs = LoadAttributes(a.attrs);
  const LoadedGraph lg = LoadGraph(a.graph, &attrs.ids());
  for (const auto& w : lg.warnings) std::cerr << "dpdg: warning: " << w << "\n";

  DirectedGraph graph = lg.graph;
  NodeAttributeTable table = attrs;
  std::vector<std::string> ids = lg.ids;
  std::vector<std::string> removed;
  if (!a.keep_isolates) {
    Preprocessed pre = DropIsolates(lg.graph, lg.ids, attrs);
    graph = std::move(pre.graph);
    table = std::move(pre.attrs);
    ids = std::move(pre.ids);
    removed = std::move(pre.removed);
    for (const auto& r : removed) {
      std::cerr << "dpdg: removed node " << r
                << " (no out-edges or no in-edges)\n";
    }
  }
  CovariateSet covs = BuildCovariates(table, schema);
  const int n = graph.n();

  const double eps = a.no_noise ? std::numeric_limits<double>::infinity()
                                : ParseEpsilon(a.epsilon);
  const PrivacyBudget budget =
      PrivacyBudget::FromEpsilon(eps, ParseAlphaFormula(a.alpha_formula));
  LogBudget(budget, n);
  const BiasMethod method = ParseBiasMethod(a.bias_method);

  const DegreeSequences deg = Degrees(graph);
  NoisyDegrees noisy = ReleaseBidegree(graph, budget, a.seed);
  const MomentSystem sys(std::move(graph), std::move(covs), noisy);

  json j;
  j["n"] = n;
  j["seed"] = a.seed;
  j["privacy"] = {{"epsilon", std::isinf(eps) ? json("infinity") : json(eps)},
                  {"alpha_n", budget.alpha},
                  {"kappa_n", budget.kappa},
                  {"s_n_sq", budget.noiseless() ? 0.0 : budget.SumNoiseVariance(n)},
                  {"alpha_formula", a.alpha_formula}};
  j["removed"] = removed;
  const FiveNumber sd = Summarize(deg.out);
  const FiveNumber sb = Summarize(deg.in);
  auto five = [](const FiveNumber& f) {
    return json{{"min", f.min}, {"q1", f.q1}, {"median", f.median},
                {"q3", f.q3}, {"max", f.max}};
  };
  j["degree_summary"] = {{"d", five(sd)}, {"b", five(sb)}};

  const FitResult fit = Fit(sys, LogitStart(sys.noisy(), sys.p()), SolverConfig{});
  j["exists"] = fit.exists;
  j["reason"] = ToString(fit.reason);
  j["inner_iterations"] = fit.inner_iters;
  j["outer_iterations"] = fit.outer_iters;
  if (!fit.exists) {
    j["d_tilde"] = noisy.d_tilde;
    j["b_tilde"] = noisy.b_tilde;
    Emit(j, a.out);
    std::cerr << "dpdg: the estimate does not exist (" << ToString(fit.reason)
              << ")\n";
    return kExitNonexistence;
  }

  const ModelParams est = *fit.params();
  const GammaInference g = GammaInferenceFor(sys, fit, budget, method);
  const ThetaInference t = ThetaSe(sys.JacobianV(est), budget);

  json nodes = json::array();
  for (int i = 0; i < n; ++i) {
    json node{{"id", ids[i]},
              {"d_tilde", noisy.d_tilde[i]},
              {"alpha_hat", est.alpha()[i]},
              {"se_alpha", t.se_alpha[i]},
              {"b_tilde", noisy.b_tilde[i]},
              {"beta_hat", est.beta()[i]}};
    node["se_beta"] = i < n - 1 ? json(t.se_beta[i]) : json(nullptr);
    nodes.push_back(node);
  }
  j["nodes"] = nodes;
  json cov = json::array();
  for (std::size_t k = 0; k < schema.attributes.size(); ++k) {
    cov.push_back({{"name", schema.attributes[k].name},
                   {"gamma_hat", g.gamma_hat[k]},
                   {"gamma_bc", g.gamma_bc[k]},
                   {"se", g.se_gamma[k]},
                   {"p_value", NullIfNan(g.p_values[k])}});
  }
  j["covariates"] = cov;
  j["bias_method"] = ToString(method);
  j["lambda_n"] = g.lambda_n;
  j["residual_f"] = fit.residual_f;
  j["residual_qc"] = fit.residual_qc;
  Emit(j, a.out);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string config;
  std::string out;
  int reps = 0;
  bool fixed_covariates = false;
  std::string alpha_formula = "consistent";
  std::string bias_method = "projected";
};

int RunSimulate(const SimulateArgs& a) {
  std::ifstream in(a.config);
  if (!in) throw ParseError("cannot open " + a.config);
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(a.config + ": " + e.what());
  }
  Scenario s = ScenarioFromJson(cfg);
  if (a.reps > 0) s.reps = a.reps;
  s.fixed_covariates = a.fixed_covariates;
  s.alpha_formula = ParseAlphaFormula(a.alpha_formula);
  s.bias_method = ParseBiasMethod(a.bias_method);
  s.Validate();
  LogBudget(PrivacyBudget::FromEpsilon(s.Epsilon(), s.alpha_formula), s.n);

  const ScenarioReport report = RunScenario(s, SolverConfig{});
  std::filesystem::create_directories(a.out);
  WriteReportFiles(report, a.out);
  json resolved = ScenarioToJson(s);
  resolved["fixed_covariates"] = s.fixed_covariates;
  resolved["alpha_formula"] = a.alpha_formula;
  resolved["bias_method"] = a.bias_method;
  Emit(resolved, (std::filesystem::path(a.out) / "scenario.json").string());
  std::fprintf(stderr, "dpdg: %d of %d replications produced an estimate\n",
               report.existing, s.reps);
  return kExitOk;
}

// ---------------------------------------------------------------------------

std::vector<std::vector<std::string>> ReadCsv(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw ParseError("cannot open " + p.string());
  std::vector<std::vector<std::string>> rows;
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    rows.push_back(std::move(cells));
  }
  if (rows.empty()) throw ParseError(p.string() + " is empty");
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != rows[0].size()) {
      throw ParseError(p.string() + ": ragged row", static_cast<int>(r + 1));
    }
  }
  return rows;
}

void PrintTable(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(rows[0].size(), 0);
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  }
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (std::size_t c = 0; c < rows[k].size(); ++c) {
      std::cout << (c ? "  " : "") << std::string(width[c] - rows[k][c].size(), ' ')
                << rows[k][c];
    }
    std::cout << "\n";
    if (k == 0) {
      std::size_t total = 0;
      for (std::size_t w : width) total += w + 2;
      std::cout << std::string(total - 2, '-') << "\n";
    }
  }
}

int RunReport(const std::string& dir) {
  const std::filesystem::path d(dir);
  std::cout << "Degree parameters: 95% coverage [mean interval length] (nonexistence %)\n\n";
  PrintTable(ReadCsv(d / "coverage.csv"));
  std::cout << "\nCovariate effects\n\n";
  PrintTable(ReadCsv(d / "gamma.csv"));
  return kExitOk;
}

// ---------------------------------------------------------------------------

template <typename F>
int Guard(F&& body) {
  try {
    return body();
  } catch (const DegeneracyError& e) {
    std::cerr << "dpdg: degenerate: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const SingularityError& e) {
    std::cerr << "dpdg: degenerate: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const ParseError& e) {
    std::cerr << "dpdg: parse error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ValidationError& e) {
    std::cerr << "dpdg: invalid input: " << e.what() << "\n";
    return kExitInput;
  } catch (const SchemaError& e) {
    std::cerr << "dpdg: schema error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "dpdg: invalid argument: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "dpdg: " << e.what() << "\n";
    return kExitInput;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private estimation for directed graphs with covariates"};
  app.require_subcommand(1);

  ReleaseArgs rel;
  auto* release = app.add_subcommand("release", "Release a noisy bi-degree sequence");
  release->add_option("--graph", rel.graph, "Edge list CSV (src,dst)")->required();
  release->add_option("--epsilon", rel.epsilon, "Privacy parameter, or 'inf'")->required();
  release->add_option("--seed", rel.seed, "Random seed")->required();
  release->add_option("--alpha-formula", rel.alpha_formula,
                      "Noise parameter: consistent (exp(-eps/2)) or literal (exp(-2/eps))")
      ->check(CLI::IsMember({"consistent", "literal"}));
  release->add_option("--out", rel.out, "Output file (default stdout)");

  FitArgs fit;
  auto* fitcmd = app.add_subcommand("fit", "Fit the model on a privately released graph");
  fitcmd->add_option("--graph", fit.graph, "Edge list CSV (src,dst)")->required();
  fitcmd->add_option("--attrs", fit.attrs, "Node attribute CSV (id,...)")->required();
  fitcmd->add_option("--schema", fit.schema, "Attribute schema JSON")->required();
  fitcmd->add_option("--epsilon", fit.epsilon, "Privacy parameter, or 'inf'");
  fitcmd->add_option("--seed", fit.seed, "Random seed")->required();
  fitcmd->add_flag("--no-noise", fit.no_noise, "Use the exact degrees");
  fitcmd->add_flag("--keep-isolates", fit.keep_isolates,
                   "Do not drop nodes without out- or in-edges");
  fitcmd->add_option("--alpha-formula", fit.alpha_formula)
      ->check(CLI::IsMember({"consistent", "literal"}));
  fitcmd->add_option("--bias-method", fit.bias_method)
      ->check(CLI::IsMember({"projected", "literal"}));
  fitcmd->add_option("--out", fit.out, "Output file (default stdout)");

  SimulateArgs sim;
  auto* simcmd = app.add_subcommand("simulate", "Run a Monte Carlo scenario");
  simcmd->add_option("--config", sim.config, "Scenario JSON")->required();
  simcmd->add_option("--out", sim.out, "Output directory")->required();
  simcmd->add_option("--reps", sim.reps, "Override the replication count");
  simcmd->add_flag("--fixed-covariates", sim.fixed_covariates,
                   "Draw covariates once from the base seed");
  simcmd->add_option("--alpha-formula", sim.alpha_formula)
      ->check(CLI::IsMember({"consistent", "literal"}));
  simcmd->add_option("--bias-method", sim.bias_method)
      ->check(CLI::IsMember({"projected", "literal"}));

  std::string report_dir;
  auto* report = app.add_subcommand("report", "Summarize simulation output");
  report->add_option("--in", report_dir, "Directory written by simulate")->required();

  std::string lz_work, lz_attr, lz_out;
  auto* lazega = app.add_subcommand("convert-lazega",
                                    "Convert ELwork/ELattr into edges.csv, attrs.csv, schema.json");
  lazega->add_option("--work", lz_work, "ELwork adjacency file")->required();
  lazega->add_option("--attr", lz_attr, "ELattr attribute file")->required();
  lazega->add_option("--out", lz_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  if (*release) return Guard([&] { return RunRelease(rel); });
  if (*fitcmd) return Guard([&] { return RunFit(fit); });
  if (*simcmd) return Guard([&] { return RunSimulate(sim); });
  if (*report) return Guard([&] { return RunReport(report_dir); });
  if (*lazega) {
    return Guard([&] {
      ConvertLazega(lz_work, lz_attr, lz_out);
      return kExitOk;
    });
  }
  return kExitInput;
}
