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

#include "dpdg/solver.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dpdg/errors.h"

namespace dpdg {
namespace {

double InfNorm(const Vector& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

bool Diverged(const Vector& v, double bound) {
  return !v.allFinite() || InfNorm(v) > bound;
}

double ClampedLogit(double degree, int n) {
  const double hi = n - 1.5;
  const double c = std::clamp(degree, 0.5, std::max(0.5, hi));
  return std::log(c / (n - 1.0 - c));
}

// S F with the component along u = (1_n, 0) halved. S V u = 2 u exactly and
// the matching left eigenvector is diag(V), so without this the plain
// iteration oscillates along u.
Vector ApproxStep(const StructuredJacobian& v, const Vector& f) {
  const int n = v.n();
  Vector step = ApproxInverse(v).Apply(f);
  const double weight = v.Diagonal().dot(step) / v.v11().sum();
  step.head(n).array() -= 0.5 * weight;
  return step;
}

}  // namespace

void SolverConfig::Validate() const {
  if (!(tol_theta > 0.0) || !(tol_gamma > 0.0) || max_inner <= 0 ||
      max_outer <= 0 || !(divergence_bound > 0.0)) {
    throw ParameterError("solver tolerances and limits must be positive");
  }
}

std::string_view ToString(Nonexistence reason) {
  switch (reason) {
    case Nonexistence::kNone:
      return "none";
    case Nonexistence::kInfeasibleDegrees:
      return "infeasible_degrees";
    case Nonexistence::kIterationLimit:
      return "iteration_limit";
    case Nonexistence::kDivergence:
      return "divergence";
    case Nonexistence::kSingularJacobian:
      return "singular_jacobian";
  }
  return "unknown";
}

std::optional<ModelParams> FitResult::params() const {
  if (!exists) return std::nullopt;
  return ModelParams::FromTheta(theta_hat, gamma_hat);
}

bool DegreesFeasible(const NoisyDegrees& noisy) {
  const int n = noisy.n();
  const auto inside = [n](long x) { return x > 0 && x < n - 1; };
  for (int i = 0; i < n; ++i) {
    if (!inside(noisy.d_tilde[i])) return false;
  }
  for (int j = 0; j < n - 1; ++j) {
    if (!inside(noisy.b_tilde[j])) return false;
  }
  const long implied_last =
      std::accumulate(noisy.d_tilde.begin(), noisy.d_tilde.end(), 0L) -
      std::accumulate(noisy.b_tilde.begin(), noisy.b_tilde.end() - 1, 0L);
  return inside(implied_last);
}

ModelParams LogitStart(const NoisyDegrees& noisy, int p) {
  const int n = noisy.n();
  if (n < 2) throw DomainError("need at least 2 nodes");
  const double mean =
      std::accumulate(noisy.d_tilde.begin(), noisy.d_tilde.end(), 0.0) / n;
  const double anchor = ClampedLogit(static_cast<double>(noisy.b_tilde[n - 1]), n);
  const double centre = ClampedLogit(mean, n);
  Vector alpha(n);
  Vector beta = Vector::Zero(n);
  for (int i = 0; i < n; ++i) {
    alpha[i] = ClampedLogit(static_cast<double>(noisy.d_tilde[i]), n) + anchor -
               centre;
  }
  for (int j = 0; j < n - 1; ++j) {
    beta[j] = ClampedLogit(static_cast<double>(noisy.b_tilde[j]), n) - anchor;
  }
  return ModelParams(std::move(alpha), std::move(beta), Vector::Zero(p));
}

ThetaSolution SolveThetaGivenGamma(const MomentSystem& sys, const Vector& gamma,
                                   const Vector& theta_init,
                                   const SolverConfig& cfg) {
  cfg.Validate();
  if (theta_init.size() != sys.theta_dim() || gamma.size() != sys.p()) {
    throw DomainError("initial values do not match the moment system");
  }
  ThetaSolution out;
  out.theta = theta_init;
  if (!DegreesFeasible(sys.noisy())) {
    out.reason = Nonexistence::kInfeasibleDegrees;
    return out;
  }
  if (Diverged(out.theta, cfg.divergence_bound)) {
    out.reason = Nonexistence::kDivergence;
    return out;
  }
  for (int k = 0;; ++k) {
    const Linearization lin =
        sys.Linearize(ModelParams::FromTheta(out.theta, gamma));
    out.residual = InfNorm(lin.F);
    out.iterations = k;
    if (!std::isfinite(out.residual)) {
      out.reason = Nonexistence::kDivergence;
      return out;
    }
    if (out.residual <= cfg.tol_theta) {
      out.exists = true;
      return out;
    }
    if (k >= cfg.max_inner) {
      out.reason = Nonexistence::kIterationLimit;
      return out;
    }
    Vector step;
    try {
      step = cfg.approx_inverse_step ? ApproxStep(lin.V, lin.F)
                                     : JacobianSolver(lin.V).Solve(lin.F);
    } catch (const SingularityError&) {
      out.reason = Nonexistence::kSingularJacobian;
      return out;
    }
    if (cfg.backtracking) {
      const double merit = lin.F.squaredNorm();
      for (int halvings = 0; halvings < 30; ++halvings) {
        const Vector trial = out.theta + step;
        if (!Diverged(trial, cfg.divergence_bound) &&
            sys.EvalF(ModelParams::FromTheta(trial, gamma)).squaredNorm() <
                merit) {
          break;
        }
        step *= 0.5;
      }
    }
    out.theta += step;
    if (Diverged(out.theta, cfg.divergence_bound)) {
      out.reason = Nonexistence::kDivergence;
      return out;
    }
  }
}

FitResult Fit(const MomentSystem& sys, const ModelParams& init,
              const SolverConfig& cfg) {
  cfg.Validate();
  if (init.n() != sys.n() || init.p() != sys.p()) {
    throw DomainError("initial parameters do not match the moment system");
  }
  FitResult out;
  Vector theta = init.Theta();
  Vector gamma = init.gamma();
  Vector gamma_step = Vector::Zero(gamma.size());
  for (int outer = 0;; ++outer) {
    ThetaSolution inner = SolveThetaGivenGamma(sys, gamma, theta, cfg);
    out.inner_iters += inner.iterations;
    // A full outer step can leave the inner iteration's basin; retreat
    // towards the last accepted gamma before giving up.
    for (int halvings = 0; !inner.exists && outer > 0 && halvings < 30;
         ++halvings) {
      gamma_step *= 0.5;
      gamma -= gamma_step;
      inner = SolveThetaGivenGamma(sys, gamma, theta, cfg);
      out.inner_iters += inner.iterations;
    }
    out.outer_iters = outer;
    out.residual_f = inner.residual;
    if (!inner.exists) {
      out.reason = inner.reason;
      return out;
    }
    theta = inner.theta;
    const Linearization lin =
        sys.Linearize(ModelParams::FromTheta(theta, gamma));
    out.residual_qc = InfNorm(lin.Q);
    if (!std::isfinite(out.residual_qc)) {
      out.reason = Nonexistence::kDivergence;
      return out;
    }
    if (out.residual_qc <= cfg.tol_gamma) {
      out.exists = true;
      out.theta_hat = std::move(theta);
      out.gamma_hat = std::move(gamma);
      return out;
    }
    if (outer >= cfg.max_outer) {
      out.reason = Nonexistence::kIterationLimit;
      return out;
    }
    const SchurMatrix h = SchurFromBlocks(lin);
    gamma_step = h.h.llt().solve(lin.Q);
    gamma += gamma_step;
    if (Diverged(gamma, cfg.divergence_bound)) {
      out.reason = Nonexistence::kDivergence;
      return out;
    }
  }
}

}  // namespace dpdg
