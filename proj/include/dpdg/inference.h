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

// Standard errors and bias correction for the private moment estimator.
//
// Degree parameters: the variance of theta_hat_i is approximated by
//   1/v_ii + 1/v_{2n,2n} + s_n^2 / v_{2n,2n}^2,
// where s_n^2 is the variance of the summed release noise. Differences within
// a block only keep 1/v_ii + 1/v_jj.
//
// Covariate effects: H here is the positive definite -dQ_c/dgamma',
// se(gamma_hat_k) = sqrt([H^{-1}]_kk), and the leading bias of gamma_hat is
// -sqrt(N) H^{-1} B with N = n(n-1), so
//   gamma_bc = gamma_hat + sqrt(N) H^{-1} B_hat.

#ifndef DPDG_INFERENCE_H_
#define DPDG_INFERENCE_H_

#include <string>

#include "dpdg/dp_release.h"
#include "dpdg/moment_system.h"
#include "dpdg/solver.h"

namespace dpdg {

struct ThetaInference {
  int n = 0;
  Vector se_alpha;   // length n
  Vector se_beta;    // length n-1; beta_n is the fixed reference
  Vector v_diag;     // v_hat_{i,i}, length 2n-1
  double v2n2n = 0.0;
  double s_n_sq = 0.0;
  // s_n / sqrt(v_{2n,2n}); reported, not checked.
  double noise_ratio = 0.0;

  // Diagonal entry for 0-based index 0..2n-1; index 2n-1 (the in-degree of
  // node n) maps to v_{2n,2n}.
  double Diag(int index) const;
};

// Throws DegeneracyError on a non-positive diagonal.
ThetaInference ThetaSe(const StructuredJacobian& v, const PrivacyBudget& budget);

// s_n^2 from the sub-exponential parameter: 2(2n-1) e^{-2/kappa} /
// (1 - e^{-2/kappa})^2. Zero when kappa is 0 (no noise).
double NoiseSumVarianceFromKappa(int n, double kappa);

struct StandardizedPair {
  double xi = 0.0;    // alpha_i - alpha_j
  double zeta = 0.0;  // alpha_i + beta_j
  double eta = 0.0;   // beta_i - beta_j
  double sd_xi = 0.0;
  double sd_zeta = 0.0;
  double sd_eta = 0.0;
};

// Standardized estimation errors at 0-based nodes i != j, given the truth.
// Throws DomainError for out-of-range or equal indices.
StandardizedPair ZStatistics(const ModelParams& estimate,
                             const ModelParams& truth,
                             const ThetaInference& inf, int i, int j);

// Plug-in bias term B_hat (length p),
//   1/(2 sqrt(N)) [sum_i sum_j Z_ij mu''_ij / v_ii + sum_j sum_i Z_ij mu''_ij /
//   v_{n+j,n+j}].
// Throws DegeneracyError if a node's variance sum vanishes.
Vector BiasTerm(const MomentSystem& sys, const ModelParams& params);

// Same scale and sign as BiasTerm, but Z_ij is replaced by its residual after
// projecting onto the degree parameters, Z_ij - [V_{gamma,theta} V^{-1}]_{i} -
// [V_{gamma,theta} V^{-1}]_{n+j}, and the second moment of
// theta_hat_i + theta_hat_{n+j} includes the release noise. Equals BiasTerm
// when every covariate has zero weighted row and column means and there is no
// noise.
Vector ProjectedBiasTerm(const MomentSystem& sys, const ModelParams& params,
                         const PrivacyBudget& budget);

enum class BiasMethod { kProjected, kLiteral };

const char* ToString(BiasMethod m);
// Accepts "projected" and "literal"; throws ParameterError otherwise.
BiasMethod ParseBiasMethod(const std::string& s);

struct GammaInference {
  Vector gamma_hat;
  Vector gamma_bc;
  Vector se_gamma;
  Vector bias_hat;
  Matrix h_inv;
  Vector p_values;  // two-sided, centred at gamma_bc
  double lambda_n = 0.0;
};

// Requires an existing estimate; throws DomainError otherwise and
// DegeneracyError if H is not positive definite.
GammaInference GammaInferenceFor(const MomentSystem& sys, const FitResult& fit,
                                 const PrivacyBudget& budget,
                                 BiasMethod method = BiasMethod::kProjected);

}  // namespace dpdg

#endif  // DPDG_INFERENCE_H_
