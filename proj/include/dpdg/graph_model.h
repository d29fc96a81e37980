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

// Directed beta-model with edge covariates:
//
//   P(a_ij = 1) = logistic(Z_ij' gamma + alpha_i + beta_j),   i != j,
//
// with beta_n = 0 fixed for identifiability. Node indices are 0-based in
// code; the last node (index n-1) carries the pinned in-degree parameter.

#ifndef DPDG_GRAPH_MODEL_H_
#define DPDG_GRAPH_MODEL_H_

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace dpdg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using IntVector = std::vector<long>;

// Numerically stable logistic function.
double Logistic(double eta);

// Binary directed graph without self-loops, stored as a dense n x n
// adjacency. Immutable after construction.
class DirectedGraph {
 public:
  // Empty graph on n >= 2 nodes.
  explicit DirectedGraph(int n);
  // Duplicate edges collapse to one. Throws DomainError on out-of-range
  // endpoints and ValidationError on self-loops.
  DirectedGraph(int n, std::span<const std::pair<int, int>> edges);
  // Row-major n x n 0/1 matrix; the diagonal must be zero.
  static DirectedGraph FromAdjacency(int n, std::span<const std::uint8_t> adj);

  int n() const { return n_; }
  bool edge(int i, int j) const {
    return adj_[static_cast<std::size_t>(i) * n_ + j] != 0;
  }
  long EdgeCount() const;
  std::vector<std::pair<int, int>> Edges() const;

  // Subgraph induced by `keep` (indices into this graph, in output order).
  DirectedGraph Induced(std::span<const int> keep) const;

  friend bool operator==(const DirectedGraph&, const DirectedGraph&) = default;

 private:
  int n_;
  std::vector<std::uint8_t> adj_;
};

struct DegreeSequences {
  IntVector out;  // d_i
  IntVector in;   // b_j
};

DegreeSequences Degrees(const DirectedGraph& g);

// Dense p-dimensional covariate vectors Z_ij for every ordered pair i != j.
class CovariateSet {
 public:
  // All-zero covariates.
  CovariateSet(int n, int p);
  // Z_ij = fn(i, j) for i != j; fn must return exactly p values.
  CovariateSet(int n, int p,
               const std::function<std::vector<double>(int, int)>& fn);

  int n() const { return n_; }
  int p() const { return p_; }
  std::span<const double> z(int i, int j) const {
    return {data_.data() + Offset(i, j), static_cast<std::size_t>(p_)};
  }
  double z(int i, int j, int k) const { return data_[Offset(i, j) + k]; }
  double Dot(int i, int j, const Vector& gamma) const;
  // max_{i != j} ||Z_ij||_inf.
  double q_bound() const { return q_bound_; }

  CovariateSet Induced(std::span<const int> keep) const;

 private:
  std::size_t Offset(int i, int j) const {
    return (static_cast<std::size_t>(i) * n_ + j) * p_;
  }
  void RefreshBound();

  int n_;
  int p_;
  std::vector<double> data_;
  double q_bound_ = 0.0;
};

// theta = (alpha_1..alpha_n, beta_1..beta_{n-1}) plus gamma. beta holds all n
// entries with beta[n-1] == 0.
class ModelParams {
 public:
  // beta may have length n (last entry must be 0) or n-1.
  ModelParams(Vector alpha, Vector beta, Vector gamma);
  static ModelParams Zero(int n, int p);
  static ModelParams FromTheta(const Vector& theta, Vector gamma);

  int n() const { return static_cast<int>(alpha_.size()); }
  int p() const { return static_cast<int>(gamma_.size()); }
  const Vector& alpha() const { return alpha_; }
  const Vector& beta() const { return beta_; }
  const Vector& gamma() const { return gamma_; }
  // Length 2n-1.
  Vector Theta() const;

  // Linear predictor Z_ij' gamma + alpha_i + beta_j.
  double Eta(const CovariateSet& covs, int i, int j) const;

 private:
  Vector alpha_;
  Vector beta_;
  Vector gamma_;
};

struct ModelBounds {
  double rho_n = 0.0;      // max_{i != j} |eta_ij|
  double m_lower = 0.25;   // e^rho / (1 + e^rho)^2
  double M_upper = 0.25;
  double M1_upper = 0.25;
};

ModelBounds ComputeBounds(const ModelParams& params, const CovariateSet& covs);

// P(a_ij = 1). Throws DomainError for i == j or indices out of range.
double EdgeProbability(const ModelParams& params, const CovariateSet& covs,
                       int i, int j);

// n x n matrix of edge probabilities with a zero diagonal.
Matrix EdgeProbabilities(const ModelParams& params, const CovariateSet& covs);

struct ExpectedDegrees {
  Vector out;
  Vector in;
};

ExpectedDegrees ComputeExpectedDegrees(const ModelParams& params,
                                       const CovariateSet& covs);

// Independent Bernoulli(p_ij) edges; deterministic in `seed`.
DirectedGraph SampleGraph(const ModelParams& params, const CovariateSet& covs,
                          std::uint64_t seed);

}  // namespace dpdg

#endif  // DPDG_GRAPH_MODEL_H_
