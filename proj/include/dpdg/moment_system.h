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

// Moment equations for the covariate directed beta-model with privatized
// degrees:
//
//   F_i       = d~_i - sum_{j != i} p_ij                i = 1..n
//   F_{n+j}   = b~_j - sum_{i != j} p_ij                j = 1..n-1
//   Q         = sum_{i != j} Z_ij (a_ij - p_ij)
//
// The in-degree equation of node n is dropped because beta_n = 0. Q uses the
// raw adjacency, not the released degrees.
//
// Jacobians are stored with positive sign: V = -dF/dtheta' and
// H = -dQ_c/dgamma' (the Schur complement of V in the full information
// matrix), so both are positive definite at interior parameters.

#ifndef DPDG_MOMENT_SYSTEM_H_
#define DPDG_MOMENT_SYSTEM_H_

#include <optional>
#include <string>

#include <Eigen/Cholesky>

#include "dpdg/dp_release.h"
#include "dpdg/graph_model.h"

namespace dpdg {

// V = [V11 V12; V12' V22] with V11 (n x n) and V22 (n-1 x n-1) diagonal and
// V12(i, j) = p_ij (1 - p_ij) for i != j, zero for i == j.
class StructuredJacobian {
 public:
  StructuredJacobian(Vector v11, Vector v22, Matrix v12);

  int n() const { return static_cast<int>(v11_.size()); }
  int dim() const { return 2 * n() - 1; }
  const Vector& v11() const { return v11_; }
  const Vector& v22() const { return v22_; }
  const Matrix& v12() const { return v12_; }

  double Entry(int r, int c) const;
  Vector Diagonal() const;
  Matrix Dense() const;
  Vector Multiply(const Vector& x) const;

  // v_{2n,i} = v_ii - sum_{j != i} v_ij for i < 2n-1 (0-based i).
  Vector BorderColumn() const;
  // v_{2n,2n} = sum_i v_{2n,i}; equals the in-degree variance of node n.
  double v2n2n() const;

  // Checks every defining condition of the class L_n(m, M) with slack `tol`.
  // On failure returns false and, if `why` is non-null, describes the first
  // violated condition.
  bool InClass(double m, double M, double tol = 1e-12,
               std::string* why = nullptr) const;

 private:
  Vector v11_;
  Vector v22_;
  Matrix v12_;
};

// Exact solver for V x = r by eliminating the diagonal out-degree block.
class JacobianSolver {
 public:
  // Throws SingularityError if V is not positive definite.
  explicit JacobianSolver(const StructuredJacobian& v);

  Vector Solve(const Vector& rhs) const;
  Matrix Solve(const Matrix& rhs) const;

 private:
  Vector inv_v11_;
  Matrix v12_;
  Eigen::LLT<Matrix> reduced_;
};

// Approximate inverse S of V:
//   s_ij = delta_ij / v_ii + 1 / v_{2n,2n}   inside the alpha or beta block,
//   s_ij = -1 / v_{2n,2n}                    across the two blocks.
class ApproxInverse {
 public:
  // Throws SingularityError on a non-positive diagonal or v_{2n,2n}.
  explicit ApproxInverse(const StructuredJacobian& v);

  int n() const { return n_; }
  double Entry(int r, int c) const;
  Matrix Dense() const;
  Vector Apply(const Vector& x) const;
  const Vector& inv_diagonal() const { return inv_diag_; }
  double inv_v2n2n() const { return inv_v2n2n_; }

 private:
  int n_;
  Vector inv_diag_;
  double inv_v2n2n_;
};

// H = -dQ/dgamma' - (dQ/dtheta') V^{-1} (dF/dgamma'), positive sign.
struct SchurMatrix {
  Matrix h;
  long n_pairs = 0;            // N = n(n-1)
  double min_eigenvalue = 0.0;
  double lambda_n = 0.0;       // n^2 ||H^{-1}||_inf
};

// All first-order quantities at one parameter value.
struct Linearization {
  Vector F;
  Vector Q;
  StructuredJacobian V;
  Matrix v_theta_gamma;  // -dF/dgamma', (2n-1) x p; also (-dQ/dtheta')'
  Matrix v_gamma_gamma;  // -dQ/dgamma', p x p
};

class MomentSystem {
 public:
  // Throws DomainError if the graph, covariates and release disagree on n.
  MomentSystem(DirectedGraph graph, CovariateSet covs, NoisyDegrees noisy);

  int n() const { return graph_.n(); }
  int p() const { return covs_.p(); }
  int theta_dim() const { return 2 * n() - 1; }
  const DirectedGraph& graph() const { return graph_; }
  const CovariateSet& covariates() const { return covs_; }
  const NoisyDegrees& noisy() const { return noisy_; }

  Vector EvalF(const ModelParams& params) const;
  Vector EvalQ(const ModelParams& params) const;
  StructuredJacobian JacobianV(const ModelParams& params) const;
  Linearization Linearize(const ModelParams& params) const;

  // Raw derivative blocks with their natural signs.
  Matrix DFDTheta(const ModelParams& params) const;
  Matrix DFDGamma(const ModelParams& params) const;
  Matrix DQDTheta(const ModelParams& params) const;
  Matrix DQDGamma(const ModelParams& params) const;

  // Throws SingularityError if V is singular and DegeneracyError if H is not
  // positive definite.
  SchurMatrix SchurH(const ModelParams& params) const;

 private:
  void CheckParams(const ModelParams& params) const;

  DirectedGraph graph_;
  CovariateSet covs_;
  NoisyDegrees noisy_;
  Vector q_observed_;  // sum_{i != j} Z_ij a_ij
};

// Assembles the positive-definite Schur complement from linearized blocks.
SchurMatrix SchurFromBlocks(const Linearization& lin);

}  // namespace dpdg

#endif  // DPDG_MOMENT_SYSTEM_H_
