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

#include "dpdg/moment_system.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>

#include "dpdg/errors.h"

namespace dpdg {
namespace {

// p (1 - p) evaluated without cancellation for large |eta|.
double LogisticVariance(double eta) {
  const double e = std::exp(-std::abs(eta));
  return e / ((1.0 + e) * (1.0 + e));
}

}  // namespace

StructuredJacobian::StructuredJacobian(Vector v11, Vector v22, Matrix v12)
    : v11_(std::move(v11)), v22_(std::move(v22)), v12_(std::move(v12)) {
  const Eigen::Index n = v11_.size();
  if (n < 2 || v22_.size() != n - 1 || v12_.rows() != n ||
      v12_.cols() != n - 1) {
    throw DomainError("inconsistent structured Jacobian block sizes");
  }
}

double StructuredJacobian::Entry(int r, int c) const {
  const int n = this->n();
  if (r < 0 || c < 0 || r >= dim() || c >= dim()) {
    throw DomainError("Jacobian entry out of range");
  }
  if (r < n && c < n) return r == c ? v11_[r] : 0.0;
  if (r >= n && c >= n) return r == c ? v22_[r - n] : 0.0;
  if (r < n) return v12_(r, c - n);
  return v12_(c, r - n);
}

Vector StructuredJacobian::Diagonal() const {
  Vector d(dim());
  d.head(n()) = v11_;
  d.tail(n() - 1) = v22_;
  return d;
}

Matrix StructuredJacobian::Dense() const {
  const int n = this->n();
  Matrix v = Matrix::Zero(dim(), dim());
  v.topLeftCorner(n, n) = v11_.asDiagonal();
  v.bottomRightCorner(n - 1, n - 1) = v22_.asDiagonal();
  v.topRightCorner(n, n - 1) = v12_;
  v.bottomLeftCorner(n - 1, n) = v12_.transpose();
  return v;
}

Vector StructuredJacobian::Multiply(const Vector& x) const {
  const int n = this->n();
  if (x.size() != dim()) throw DomainError("Jacobian multiply size mismatch");
  Vector y(dim());
  y.head(n) = v11_.cwiseProduct(x.head(n)) + v12_ * x.tail(n - 1);
  y.tail(n - 1) =
      v22_.cwiseProduct(x.tail(n - 1)) + v12_.transpose() * x.head(n);
  return y;
}

Vector StructuredJacobian::BorderColumn() const {
  const int n = this->n();
  Vector border = Vector::Zero(dim());
  border.head(n) = v11_ - v12_.rowwise().sum();
  border.tail(n - 1) = v22_ - v12_.colwise().sum().transpose();
  return border;
}

double StructuredJacobian::v2n2n() const { return BorderColumn().sum(); }

bool StructuredJacobian::InClass(double m, double M, double tol,
                                 std::string* why) const {
  const int n = this->n();
  auto fail = [&](const std::string& msg) {
    if (why != nullptr) *why = msg;
    return false;
  };
  auto near = [tol](double a, double b) {
    return std::abs(a - b) <= tol * std::max(1.0, std::abs(b));
  };
  // The two diagonal blocks and v_{i,n+i} = 0 are enforced by the storage
  // layout; the remaining conditions are numeric.
  for (int i = 0; i < n; ++i) {
    const double border = v11_[i] - v12_.row(i).sum();
    if (i < n - 1) {
      if (border < m - tol || border > M + tol) {
        std::ostringstream os;
        os << "row " << i << ": v_ii - sum_j v_ij = " << border
           << " outside [" << m << ", " << M << "]";
        return fail(os.str());
      }
    } else if (!near(v11_[i], v12_.row(i).sum())) {
      return fail("row n: v_nn differs from its off-diagonal row sum");
    }
    for (int j = 0; j < n - 1; ++j) {
      const double v = v12_(i, j);
      if (i == j) {
        if (v != 0.0) return fail("v_{i,n+i} must be zero");
        continue;
      }
      if (v < m - tol || v > M + tol) {
        std::ostringstream os;
        os << "off-diagonal entry (" << i << ", " << n + j << ") = " << v
           << " outside [" << m << ", " << M << "]";
        return fail(os.str());
      }
    }
  }
  for (int j = 0; j < n - 1; ++j) {
    if (!near(v22_[j], v12_.col(j).sum())) {
      return fail("beta-block diagonal differs from its column sum");
    }
  }
  return true;
}

JacobianSolver::JacobianSolver(const StructuredJacobian& v)
    : inv_v11_(v.n()), v12_(v.v12()) {
  for (int i = 0; i < v.n(); ++i) {
    const double d = v.v11()[i];
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw SingularityError("Jacobian has a non-positive out-degree pivot");
    }
    inv_v11_[i] = 1.0 / d;
  }
  Matrix reduced = -v12_.transpose() * inv_v11_.asDiagonal() * v12_;
  reduced.diagonal() += v.v22();
  reduced_.compute(reduced);
  if (reduced_.info() != Eigen::Success || !reduced.allFinite()) {
    throw SingularityError("Jacobian is singular");
  }
}

Vector JacobianSolver::Solve(const Vector& rhs) const {
  const Eigen::Index n = inv_v11_.size();
  Vector x(rhs.size());
  const Vector scaled = inv_v11_.cwiseProduct(rhs.head(n));
  x.tail(n - 1) = reduced_.solve(rhs.tail(n - 1) - v12_.transpose() * scaled);
  x.head(n) = inv_v11_.cwiseProduct(rhs.head(n) - v12_ * x.tail(n - 1));
  return x;
}

Matrix JacobianSolver::Solve(const Matrix& rhs) const {
  Matrix x(rhs.rows(), rhs.cols());
  for (Eigen::Index c = 0; c < rhs.cols(); ++c) x.col(c) = Solve(Vector(rhs.col(c)));
  return x;
}

ApproxInverse::ApproxInverse(const StructuredJacobian& v) : n_(v.n()) {
  const Vector diag = v.Diagonal();
  if ((diag.array() <= 0.0).any() || !diag.allFinite()) {
    throw SingularityError("approximate inverse needs a positive diagonal");
  }
  const double corner = v.v2n2n();
  if (!(corner > 0.0)) {
    throw SingularityError("approximate inverse needs v_{2n,2n} > 0");
  }
  inv_diag_ = diag.cwiseInverse();
  inv_v2n2n_ = 1.0 / corner;
}

double ApproxInverse::Entry(int r, int c) const {
  const int dim = 2 * n_ - 1;
  if (r < 0 || c < 0 || r >= dim || c >= dim) {
    throw DomainError("approximate inverse entry out of range");
  }
  const bool same_block = (r < n_) == (c < n_);
  const double rank_one = same_block ? inv_v2n2n_ : -inv_v2n2n_;
  return (r == c ? inv_diag_[r] : 0.0) + rank_one;
}

Matrix ApproxInverse::Dense() const {
  const int dim = 2 * n_ - 1;
  Matrix s(dim, dim);
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) s(r, c) = Entry(r, c);
  }
  return s;
}

Vector ApproxInverse::Apply(const Vector& x) const {
  const double net = x.head(n_).sum() - x.tail(n_ - 1).sum();
  Vector y = inv_diag_.cwiseProduct(x);
  y.head(n_).array() += inv_v2n2n_ * net;
  y.tail(n_ - 1).array() -= inv_v2n2n_ * net;
  return y;
}

MomentSystem::MomentSystem(DirectedGraph graph, CovariateSet covs,
                           NoisyDegrees noisy)
    : graph_(std::move(graph)),
      covs_(std::move(covs)),
      noisy_(std::move(noisy)),
      q_observed_(Vector::Zero(covs_.p())) {
  const int n = graph_.n();
  if (covs_.n() != n || noisy_.n() != n ||
      static_cast<int>(noisy_.b_tilde.size()) != n) {
    throw DomainError("graph, covariates and released degrees disagree on n");
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j || !graph_.edge(i, j)) continue;
      for (int k = 0; k < covs_.p(); ++k) q_observed_[k] += covs_.z(i, j, k);
    }
  }
}

void MomentSystem::CheckParams(const ModelParams& params) const {
  if (params.n() != n() || params.p() != p()) {
    throw DomainError("parameter dimensions do not match the moment system");
  }
}

Linearization MomentSystem::Linearize(const ModelParams& params) const {
  CheckParams(params);
  const int n = this->n();
  const int p = this->p();
  Vector expected_out = Vector::Zero(n);
  Vector expected_in = Vector::Zero(n);
  Vector q_model = Vector::Zero(p);
  Vector v11 = Vector::Zero(n);
  Vector v22 = Vector::Zero(n - 1);
  Matrix v12 = Matrix::Zero(n, n - 1);
  Matrix vtg = Matrix::Zero(2 * n - 1, p);
  Matrix vgg = Matrix::Zero(p, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double eta = params.Eta(covs_, i, j);
      const double prob = Logistic(eta);
      const double w = LogisticVariance(eta);
      const auto z = covs_.z(i, j);
      expected_out[i] += prob;
      expected_in[j] += prob;
      v11[i] += w;
      if (j < n - 1) {
        v22[j] += w;
        v12(i, j) = w;
      }
      for (int k = 0; k < p; ++k) {
        q_model[k] += z[k] * prob;
        vtg(i, k) += z[k] * w;
        if (j < n - 1) vtg(n + j, k) += z[k] * w;
        for (int l = 0; l <= k; ++l) vgg(k, l) += w * z[k] * z[l];
      }
    }
  }
  for (int k = 0; k < p; ++k) {
    for (int l = k + 1; l < p; ++l) vgg(k, l) = vgg(l, k);
  }
  Vector F(2 * n - 1);
  for (int i = 0; i < n; ++i) {
    F[i] = static_cast<double>(noisy_.d_tilde[i]) - expected_out[i];
  }
  for (int j = 0; j < n - 1; ++j) {
    F[n + j] = static_cast<double>(noisy_.b_tilde[j]) - expected_in[j];
  }
  return Linearization{std::move(F), q_observed_ - q_model,
                       StructuredJacobian(std::move(v11), std::move(v22),
                                          std::move(v12)),
                       std::move(vtg), std::move(vgg)};
}

Vector MomentSystem::EvalF(const ModelParams& params) const {
  return Linearize(params).F;
}

Vector MomentSystem::EvalQ(const ModelParams& params) const {
  return Linearize(params).Q;
}

StructuredJacobian MomentSystem::JacobianV(const ModelParams& params) const {
  return Linearize(params).V;
}

Matrix MomentSystem::DFDTheta(const ModelParams& params) const {
  return -Linearize(params).V.Dense();
}

Matrix MomentSystem::DFDGamma(const ModelParams& params) const {
  return -Linearize(params).v_theta_gamma;
}

Matrix MomentSystem::DQDTheta(const ModelParams& params) const {
  return -Linearize(params).v_theta_gamma.transpose();
}

Matrix MomentSystem::DQDGamma(const ModelParams& params) const {
  return -Linearize(params).v_gamma_gamma;
}

SchurMatrix MomentSystem::SchurH(const ModelParams& params) const {
  return SchurFromBlocks(Linearize(params));
}

SchurMatrix SchurFromBlocks(const Linearization& lin) {
  const int n = lin.V.n();
  const Eigen::Index p = lin.v_gamma_gamma.rows();
  SchurMatrix out;
  out.n_pairs = static_cast<long>(n) * (n - 1);
  if (p == 0) {
    out.h = Matrix::Zero(0, 0);
    return out;
  }
  const JacobianSolver solver(lin.V);
  const Matrix x = solver.Solve(lin.v_theta_gamma);
  Matrix h = lin.v_gamma_gamma - lin.v_theta_gamma.transpose() * x;
  out.h = 0.5 * (h + h.transpose());
  if (!out.h.allFinite()) throw DegeneracyError("H has non-finite entries");
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(out.h, Eigen::EigenvaluesOnly);
  out.min_eigenvalue = eig.eigenvalues().minCoeff();
  const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
  if (!(out.min_eigenvalue > 1e-10 * scale)) {
    std::ostringstream os;
    os << "H is not positive definite (smallest eigenvalue "
       << out.min_eigenvalue << ")";
    throw DegeneracyError(os.str());
  }
  const Matrix h_inv = out.h.inverse();
  out.lambda_n = static_cast<double>(n) * n *
                 h_inv.cwiseAbs().rowwise().sum().maxCoeff();
  return out;
}

}  // namespace dpdg
