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

// Two-stage Newton solver for the moment equations.
//
// Inner stage: for fixed gamma, solve F_gamma(theta) = 0 by Newton's method,
// theta <- theta + V^{-1} F. Outer stage: profiled Newton on
// Q_c(gamma) = Q(theta_hat_gamma, gamma), gamma <- gamma + H^{-1} Q_c. An outer
// step is halved while the inner stage fails at the trial gamma.
//
// Failure to find a root is reported as nonexistence, not as an error: with
// noisy degrees the equations frequently have no finite solution and the
// frequency of that event is itself a statistic of interest.

#ifndef DPDG_SOLVER_H_
#define DPDG_SOLVER_H_

#include <optional>
#include <string_view>

#include "dpdg/moment_system.h"

namespace dpdg {

struct SolverConfig {
  double tol_theta = 1e-8;         // ||F||_inf, degree units
  double tol_gamma = 1e-8;         // ||Q_c||_inf, covariate-sum units
  int max_inner = 200;
  int max_outer = 100;
  double divergence_bound = 1e6;   // on ||theta||_inf and ||gamma||_inf
  bool backtracking = false;       // halve steps until ||F||_2 decreases
  bool approx_inverse_step = false;  // inner step with S instead of V^{-1}

  // Throws ParameterError if any tolerance or limit is non-positive.
  void Validate() const;
};

enum class Nonexistence {
  kNone,
  kInfeasibleDegrees,  // a released degree outside (0, n-1)
  kIterationLimit,
  kDivergence,
  kSingularJacobian,
};

std::string_view ToString(Nonexistence reason);

struct ThetaSolution {
  bool exists = false;
  Nonexistence reason = Nonexistence::kNone;
  Vector theta;
  int iterations = 0;
  double residual = 0.0;  // ||F||_inf at the returned theta
};

struct FitResult {
  bool exists = false;
  Nonexistence reason = Nonexistence::kNone;
  Vector theta_hat;  // empty unless exists
  Vector gamma_hat;  // empty unless exists
  int inner_iters = 0;  // summed over all inner solves
  int outer_iters = 0;
  double residual_f = 0.0;
  double residual_qc = 0.0;

  // beta_n = 0 is implied by the theta layout.
  std::optional<ModelParams> params() const;
};

// Released degree for which no finite solution can exist, if any. Checks
// 0 < d~_i < n-1, 0 < b~_j < n-1 (j < n) and the same bound for the in-degree
// of node n implied by sum(d~) - sum_{j<n} b~_j.
bool DegreesFeasible(const NoisyDegrees& noisy);

// Starting point from the released degrees:
//   alpha_i = l(d~_i) + l(b~_n) - l(mean), beta_j = l(b~_j) - l(b~_n),
// where l(c) = log(c / (n-1-c)) with c clamped to [0.5, n-1.5]; gamma = 0.
ModelParams LogitStart(const NoisyDegrees& noisy, int p);

ThetaSolution SolveThetaGivenGamma(const MomentSystem& sys, const Vector& gamma,
                                   const Vector& theta_init,
                                   const SolverConfig& cfg);

// Throws DegeneracyError if H is not positive definite along the way.
FitResult Fit(const MomentSystem& sys, const ModelParams& init,
              const SolverConfig& cfg);

}  // namespace dpdg

#endif  // DPDG_SOLVER_H_
