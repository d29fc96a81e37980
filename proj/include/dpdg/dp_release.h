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

// Discrete Laplace mechanism for the bi-degree sequence of a directed graph.
//
// Adding or removing one edge changes one out-degree and one in-degree by 1,
// so the L1 sensitivity of (d, b) is 2 and noise with parameter
// alpha = exp(-epsilon / 2) makes the release epsilon-edge private.

#ifndef DPDG_DP_RELEASE_H_
#define DPDG_DP_RELEASE_H_

#include <cstdint>
#include <random>

#include "dpdg/graph_model.h"

namespace dpdg {

// Two-sided geometric law P(X = x) = (1 - a) / (1 + a) * a^|x| on the
// integers, 0 < a < 1.
class DiscreteLaplace {
 public:
  // Throws ParameterError unless 0 < alpha < 1.
  explicit DiscreteLaplace(double alpha);

  double alpha() const { return alpha_; }
  double Pmf(long x) const;
  // P(|X| > t) for t >= 0.
  double TailProbability(long t) const;
  double Variance() const;

  // Difference of two i.i.d. Geometric(1 - alpha) failure counts.
  template <typename URBG>
  long Sample(URBG& rng) const {
    std::geometric_distribution<long> geom(1.0 - alpha_);
    const long plus = geom(rng);
    const long minus = geom(rng);
    return plus - minus;
  }

 private:
  double alpha_;
};

// How alpha_n is derived from epsilon_n. kConsistent uses exp(-eps/2), which
// matches the sensitivity-2 calibration; kLiteral uses exp(-2/eps).
enum class AlphaFormula { kConsistent, kLiteral };

struct PrivacyBudget {
  static constexpr int kSensitivity = 2;
  // alpha below this is treated as the noiseless limit by samplers.
  static constexpr double kAlphaFloor = 1e-12;

  double epsilon = 0.0;  // +inf means no noise
  double alpha = 0.0;    // in [0, 1); 0 only for epsilon = +inf
  double kappa = 0.0;    // sub-exponential parameter 2 / log(1 / alpha)

  // Throws ParameterError unless epsilon > 0. Infinite epsilon gives the
  // noiseless budget.
  static PrivacyBudget FromEpsilon(
      double epsilon, AlphaFormula formula = AlphaFormula::kConsistent);
  static PrivacyBudget Noiseless();

  bool noiseless() const { return alpha == 0.0; }
  // Variance of a single noise coordinate, 2 alpha / (1 - alpha)^2.
  double NoiseVariance() const;
  // Variance of sum_{i<=n} e_i^+ - sum_{i<n} e_i^-: (2n-1) times the
  // single-coordinate variance.
  double SumNoiseVariance(int n) const;
};

struct NoisyDegrees {
  IntVector d_tilde;
  IntVector b_tilde;

  int n() const { return static_cast<int>(d_tilde.size()); }
  friend bool operator==(const NoisyDegrees&, const NoisyDegrees&) = default;
};

// Exact degrees wrapped as a release (no noise).
NoisyDegrees ExactDegrees(const DirectedGraph& g);

// d~_i = d_i + e_i^+, b~_i = b_i + e_i^-, with 2n i.i.d. discrete Laplace
// draws. The draw order is e_1^+, e_1^-, e_2^+, ... and depends only on seed.
NoisyDegrees ReleaseBidegree(const DirectedGraph& g,
                             const PrivacyBudget& budget, std::uint64_t seed);

}  // namespace dpdg

#endif  // DPDG_DP_RELEASE_H_
