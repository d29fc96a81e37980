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

#include "dpdg/graph_model.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "dpdg/errors.h"
#include "dpdg/random.h"

namespace dpdg {
namespace {

void CheckNodeCount(int n) {
  if (n < 2) {
    throw DomainError("graph needs at least 2 nodes, got " + std::to_string(n));
  }
}

void CheckPair(int n, int i, int j) {
  if (i < 0 || j < 0 || i >= n || j >= n) {
    throw DomainError("node index out of range: (" + std::to_string(i) + ", " +
                      std::to_string(j) + ") with n = " + std::to_string(n));
  }
  if (i == j) {
    throw DomainError("self-loop query at node " + std::to_string(i));
  }
}

}  // namespace

double Logistic(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

DirectedGraph::DirectedGraph(int n) : n_(n) {
  CheckNodeCount(n);
  adj_.assign(static_cast<std::size_t>(n) * n, 0);
}

DirectedGraph::DirectedGraph(int n, std::span<const std::pair<int, int>> edges)
    : DirectedGraph(n) {
  for (const auto& [i, j] : edges) {
    if (i == j && i >= 0 && i < n) {
      throw ValidationError("self-loop at node " + std::to_string(i));
    }
    CheckPair(n, i, j);
    adj_[static_cast<std::size_t>(i) * n + j] = 1;
  }
}

DirectedGraph DirectedGraph::FromAdjacency(int n,
                                           std::span<const std::uint8_t> adj) {
  DirectedGraph g(n);
  if (adj.size() != g.adj_.size()) {
    throw DomainError("adjacency has " + std::to_string(adj.size()) +
                      " entries, expected n*n");
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const std::uint8_t a = adj[static_cast<std::size_t>(i) * n + j];
      if (a > 1) throw DomainError("adjacency entries must be 0 or 1");
      if (i == j && a != 0) {
        throw ValidationError("self-loop at node " + std::to_string(i));
      }
      g.adj_[static_cast<std::size_t>(i) * n + j] = a;
    }
  }
  return g;
}

long DirectedGraph::EdgeCount() const {
  return std::count(adj_.begin(), adj_.end(), std::uint8_t{1});
}

std::vector<std::pair<int, int>> DirectedGraph::Edges() const {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      if (edge(i, j)) out.emplace_back(i, j);
    }
  }
  return out;
}

DirectedGraph DirectedGraph::Induced(std::span<const int> keep) const {
  const int m = static_cast<int>(keep.size());
  for (int k : keep) {
    if (k < 0 || k >= n_) throw DomainError("induced subgraph index out of range");
  }
  DirectedGraph g(m);
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      if (a != b && edge(keep[a], keep[b])) {
        g.adj_[static_cast<std::size_t>(a) * m + b] = 1;
      }
    }
  }
  return g;
}

DegreeSequences Degrees(const DirectedGraph& g) {
  const int n = g.n();
  DegreeSequences deg{IntVector(n, 0), IntVector(n, 0)};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (g.edge(i, j)) {
        ++deg.out[i];
        ++deg.in[j];
      }
    }
  }
  return deg;
}

CovariateSet::CovariateSet(int n, int p) : n_(n), p_(p) {
  CheckNodeCount(n);
  if (p < 0) throw DomainError("covariate dimension must be non-negative");
  data_.assign(static_cast<std::size_t>(n) * n * p, 0.0);
}

CovariateSet::CovariateSet(
    int n, int p, const std::function<std::vector<double>(int, int)>& fn)
    : CovariateSet(n, p) {
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const std::vector<double> v = fn(i, j);
      if (static_cast<int>(v.size()) != p) {
        throw DomainError("covariate function returned " +
                          std::to_string(v.size()) + " values, expected " +
                          std::to_string(p));
      }
      std::copy(v.begin(), v.end(), data_.begin() + Offset(i, j));
    }
  }
  RefreshBound();
}

void CovariateSet::RefreshBound() {
  q_bound_ = 0.0;
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      if (i == j) continue;
      for (double v : z(i, j)) {
        if (!std::isfinite(v)) throw DomainError("non-finite covariate value");
        q_bound_ = std::max(q_bound_, std::abs(v));
      }
    }
  }
}

double CovariateSet::Dot(int i, int j, const Vector& gamma) const {
  const double* zij = data_.data() + Offset(i, j);
  double s = 0.0;
  for (int k = 0; k < p_; ++k) s += zij[k] * gamma[k];
  return s;
}

CovariateSet CovariateSet::Induced(std::span<const int> keep) const {
  const int m = static_cast<int>(keep.size());
  for (int k : keep) {
    if (k < 0 || k >= n_) throw DomainError("induced covariate index out of range");
  }
  CovariateSet out(m, p_);
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      if (a == b) continue;
      const auto src = z(keep[a], keep[b]);
      std::copy(src.begin(), src.end(), out.data_.begin() + out.Offset(a, b));
    }
  }
  out.RefreshBound();
  return out;
}

ModelParams::ModelParams(Vector alpha, Vector beta, Vector gamma)
    : alpha_(std::move(alpha)), gamma_(std::move(gamma)) {
  const Eigen::Index n = alpha_.size();
  CheckNodeCount(static_cast<int>(n));
  if (beta.size() == n - 1) {
    beta_ = Vector::Zero(n);
    beta_.head(n - 1) = beta;
  } else if (beta.size() == n) {
    if (beta[n - 1] != 0.0) {
      throw DomainError("beta_n must be 0 (identifiability constraint)");
    }
    beta_ = std::move(beta);
  } else {
    throw DomainError("beta must have length n or n-1");
  }
}

ModelParams ModelParams::Zero(int n, int p) {
  return ModelParams(Vector::Zero(n), Vector::Zero(n), Vector::Zero(p));
}

ModelParams ModelParams::FromTheta(const Vector& theta, Vector gamma) {
  if (theta.size() < 3 || theta.size() % 2 == 0) {
    throw DomainError("theta must have odd length 2n-1 with n >= 2");
  }
  const Eigen::Index n = (theta.size() + 1) / 2;
  return ModelParams(theta.head(n), theta.tail(n - 1), std::move(gamma));
}

Vector ModelParams::Theta() const {
  const Eigen::Index n = alpha_.size();
  Vector theta(2 * n - 1);
  theta.head(n) = alpha_;
  theta.tail(n - 1) = beta_.head(n - 1);
  return theta;
}

double ModelParams::Eta(const CovariateSet& covs, int i, int j) const {
  return covs.Dot(i, j, gamma_) + alpha_[i] + beta_[j];
}

ModelBounds ComputeBounds(const ModelParams& params, const CovariateSet& covs) {
  ModelBounds b;
  const int n = params.n();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j) b.rho_n = std::max(b.rho_n, std::abs(params.Eta(covs, i, j)));
    }
  }
  // e^rho / (1 + e^rho)^2 written in the overflow-free form.
  const double e = std::exp(-b.rho_n);
  b.m_lower = e / ((1.0 + e) * (1.0 + e));
  return b;
}

namespace {

void CheckConformable(const ModelParams& params, const CovariateSet& covs) {
  if (params.n() != covs.n() || params.p() != covs.p()) {
    throw DomainError("parameters (n=" + std::to_string(params.n()) +
                      ", p=" + std::to_string(params.p()) +
                      ") do not match covariates (n=" +
                      std::to_string(covs.n()) +
                      ", p=" + std::to_string(covs.p()) + ")");
  }
}

}  // namespace

double EdgeProbability(const ModelParams& params, const CovariateSet& covs,
                       int i, int j) {
  CheckConformable(params, covs);
  CheckPair(params.n(), i, j);
  return Logistic(params.Eta(covs, i, j));
}

Matrix EdgeProbabilities(const ModelParams& params, const CovariateSet& covs) {
  CheckConformable(params, covs);
  const int n = params.n();
  Matrix prob = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j) prob(i, j) = Logistic(params.Eta(covs, i, j));
    }
  }
  return prob;
}

ExpectedDegrees ComputeExpectedDegrees(const ModelParams& params,
                                       const CovariateSet& covs) {
  const Matrix prob = EdgeProbabilities(params, covs);
  return {prob.rowwise().sum(), prob.colwise().sum().transpose()};
}

DirectedGraph SampleGraph(const ModelParams& params, const CovariateSet& covs,
                          std::uint64_t seed) {
  const Matrix prob = EdgeProbabilities(params, covs);
  const int n = params.n();
  Rng rng = MakeRng(seed, Stream::kGraph);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::uint8_t> adj(static_cast<std::size_t>(n) * n, 0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      // One uniform per ordered pair keeps the stream layout independent of p.
      const double u = unif(rng);
      adj[static_cast<std::size_t>(i) * n + j] = u < prob(i, j) ? 1 : 0;
    }
  }
  return DirectedGraph::FromAdjacency(n, adj);
}

}  // namespace dpdg
