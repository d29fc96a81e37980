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

#include "dpdg/inference.h"

#include <cmath>
#include <string>

#include "dpdg/errors.h"
#include "dpdg/stats.h"

namespace dpdg {

double ThetaInference::Diag(int index) const {
  if (index < 0 || index > 2 * n - 1) {
    throw DomainError("Jacobian diagonal index out of range");
  }
  return index == 2 * n - 1 ? v2n2n : v_diag[index];
}

double NoiseSumVarianceFromKappa(int n, double kappa) {
  if (kappa <= 0.0) return 0.0;
  const double a = std::exp(-2.0 / kappa);
  return 2.0 * (2.0 * n - 1.0) * a / ((1.0 - a) * (1.0 - a));
}

ThetaInference ThetaSe(const StructuredJacobian& v,
                       const PrivacyBudget& budget) {
  ThetaInference out;
  out.n = v.n();
  out.v_diag = v.Diagonal();
  out.v2n2n = v.v2n2n();
  if ((out.v_diag.array() <= 0.0).any() || !(out.v2n2n > 0.0)) {
    throw DegeneracyError("non-positive Jacobian diagonal in variance plug-in");
  }
  out.s_n_sq = budget.noiseless() ? 0.0 : budget.SumNoiseVariance(out.n);
  out.noise_ratio = std::sqrt(out.s_n_sq / out.v2n2n);
  const double shared =
      1.0 / out.v2n2n + out.s_n_sq / (out.v2n2n * out.v2n2n);
  const Vector var = out.v_diag.cwiseInverse().array() + shared;
  out.se_alpha = var.head(out.n).cwiseSqrt();
  out.se_beta = var.tail(out.n - 1).cwiseSqrt();
  return out;
}

StandardizedPair ZStatistics(const ModelParams& estimate,
                             const ModelParams& truth,
                             const ThetaInference& inf, int i, int j) {
  const int n = inf.n;
  if (estimate.n() != n || truth.n() != n) {
    throw DomainError("estimate, truth and inference disagree on n");
  }
  if (i < 0 || j < 0 || i >= n || j >= n || i == j) {
    throw DomainError("pair (" + std::to_string(i) + ", " + std::to_string(j) +
                      ") is not a pair of distinct nodes");
  }
  const auto& a_hat = estimate.alpha();
  const auto& b_hat = estimate.beta();
  const auto& a = truth.alpha();
  const auto& b = truth.beta();
  StandardizedPair s;
  // beta_n is fixed, so a pair touching it keeps the shared noise term.
  const double ref_noise = inf.s_n_sq / (inf.v2n2n * inf.v2n2n);
  const bool ref_i = (i == n - 1);
  const bool ref_j = (j == n - 1);
  s.sd_xi = std::sqrt(1.0 / inf.Diag(i) + 1.0 / inf.Diag(j));
  s.sd_zeta = std::sqrt(1.0 / inf.Diag(i) + 1.0 / inf.Diag(n + j) +
                        (ref_j ? ref_noise : 0.0));
  s.sd_eta = std::sqrt(1.0 / inf.Diag(n + i) + 1.0 / inf.Diag(n + j) +
                       (ref_i || ref_j ? ref_noise : 0.0));
  s.xi = (a_hat[i] - a_hat[j] - (a[i] - a[j])) / s.sd_xi;
  s.zeta = (a_hat[i] + b_hat[j] - a[i] - b[j]) / s.sd_zeta;
  s.eta = (b_hat[i] - b_hat[j] - (b[i] - b[j])) / s.sd_eta;
  return s;
}

Vector BiasTerm(const MomentSystem& sys, const ModelParams& params) {
  const int n = sys.n();
  const int p = sys.p();
  if (params.n() != n || params.p() != p) {
    throw DomainError("parameters do not match the moment system");
  }
  const CovariateSet& covs = sys.covariates();
  // Row (out) and column (in) sums of Z_ij * w_ij (1 - 2 p_ij) and w_ij.
  Matrix row_num = Matrix::Zero(n, p);
  Matrix col_num = Matrix::Zero(n, p);
  Vector row_den = Vector::Zero(n);
  Vector col_den = Vector::Zero(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double eta = params.Eta(covs, i, j);
      const double e = std::exp(-std::abs(eta));
      const double w = e / ((1.0 + e) * (1.0 + e));
      // e^eta (1 - e^eta) / (1 + e^eta)^3 = w (1 - 2p) = -w tanh(eta / 2).
      const double third = -w * std::tanh(0.5 * eta);
      row_den[i] += w;
      col_den[j] += w;
      for (int k = 0; k < p; ++k) {
        const double zt = covs.z(i, j, k) * third;
        row_num(i, k) += zt;
        col_num(j, k) += zt;
      }
    }
  }
  Vector bracket = Vector::Zero(p);
  for (int i = 0; i < n; ++i) {
    if (!(row_den[i] > 0.0) || !(col_den[i] > 0.0)) {
      throw DegeneracyError("bias term: node " + std::to_string(i) +
                            " has zero edge variance");
    }
    bracket += row_num.row(i).transpose() / row_den[i];
    bracket += col_num.row(i).transpose() / col_den[i];
  }
  const double big_n = static_cast<double>(n) * (n - 1);
  return bracket / (2.0 * std::sqrt(big_n));
}

Vector ProjectedBiasTerm(const MomentSystem& sys, const ModelParams& params,
                         const PrivacyBudget& budget) {
  const int n = sys.n();
  const int p = sys.p();
  if (params.n() != n || params.p() != p) {
    throw DomainError("parameters do not match the moment system");
  }
  const Linearization lin = sys.Linearize(params);
  const Vector inv_diag = lin.V.Diagonal().cwiseInverse();
  const double inv_vnn = 1.0 / lin.V.v2n2n();
  if (!(inv_diag.array() > 0.0).all() || !(inv_vnn > 0.0)) {
    throw DegeneracyError("bias term: non-positive Jacobian diagonal");
  }
  // proj(r, k) = [V^{-1} V_{theta,gamma}]_{r,k}
  const Matrix proj = JacobianSolver(lin.V).Solve(lin.v_theta_gamma);
  const double sigma2 = budget.noiseless() ? 0.0 : budget.NoiseVariance();
  const double s_n_sq = budget.noiseless() ? 0.0 : budget.SumNoiseVariance(n);
  const CovariateSet& covs = sys.covariates();
  Vector sum = Vector::Zero(p);
  for (int i = 0; i < n; ++i) {
    const double ui = inv_diag[i];
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double eta = params.Eta(covs, i, j);
      const double e = std::exp(-std::abs(eta));
      const double w = e / ((1.0 + e) * (1.0 + e));
      const double third = -w * std::tanh(0.5 * eta);
      const bool ref = (j == n - 1);
      const double uj = ref ? inv_vnn : inv_diag[n + j];
      const double second = ui + uj + sigma2 * ui * ui +
                            (ref ? s_n_sq * uj * uj : sigma2 * uj * uj);
      for (int k = 0; k < p; ++k) {
        double z = covs.z(i, j, k) - proj(i, k);
        if (!ref) z -= proj(n + j, k);
        sum[k] += z * third * second;
      }
    }
  }
  const double big_n = static_cast<double>(n) * (n - 1);
  return sum / (2.0 * std::sqrt(big_n));
}

const char* ToString(BiasMethod m) {
  return m == BiasMethod::kProjected ? "projected" : "literal";
}

BiasMethod ParseBiasMethod(const std::string& s) {
  if (s == "projected") return BiasMethod::kProjected;
  if (s == "literal") return BiasMethod::kLiteral;
  throw ParameterError("unknown bias method '" + s + "'");
}

GammaInference GammaInferenceFor(const MomentSystem& sys, const FitResult& fit,
                                 const PrivacyBudget& budget,
                                 BiasMethod method) {
  const auto params = fit.params();
  if (!params) throw DomainError("gamma inference needs an existing estimate");
  const SchurMatrix h = sys.SchurH(*params);
  GammaInference out;
  out.gamma_hat = params->gamma();
  out.h_inv = h.h.inverse();
  out.lambda_n = h.lambda_n;
  out.bias_hat = method == BiasMethod::kProjected
                     ? ProjectedBiasTerm(sys, *params, budget)
                     : BiasTerm(sys, *params);
  const double big_n = static_cast<double>(h.n_pairs);
  out.gamma_bc = out.gamma_hat + std::sqrt(big_n) * out.h_inv * out.bias_hat;
  out.se_gamma = out.h_inv.diagonal().cwiseSqrt();
  out.p_values.resize(out.gamma_bc.size());
  for (Eigen::Index k = 0; k < out.gamma_bc.size(); ++k) {
    out.p_values[k] = TwoSidedPValue(out.gamma_bc[k] / out.se_gamma[k]);
  }
  return out;
}

}  // namespace dpdg
