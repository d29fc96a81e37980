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

#include "dpdg/dp_release.h"

#include <cmath>
#include <limits>
#include <string>

#include "dpdg/errors.h"
#include "dpdg/random.h"

namespace dpdg {

DiscreteLaplace::DiscreteLaplace(double alpha) : alpha_(alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ParameterError("discrete Laplace parameter must lie in (0, 1), got " +
                         std::to_string(alpha));
  }
}

double DiscreteLaplace::Pmf(long x) const {
  const double ax = static_cast<double>(x < 0 ? -x : x);
  return (1.0 - alpha_) / (1.0 + alpha_) * std::pow(alpha_, ax);
}

double DiscreteLaplace::TailProbability(long t) const {
  if (t < 0) return 1.0;
  // 2 * (1-a)/(1+a) * sum_{x > t} a^x = 2 a^{t+1} / (1 + a).
  return 2.0 * std::pow(alpha_, static_cast<double>(t + 1)) / (1.0 + alpha_);
}

double DiscreteLaplace::Variance() const {
  return 2.0 * alpha_ / ((1.0 - alpha_) * (1.0 - alpha_));
}

PrivacyBudget PrivacyBudget::FromEpsilon(double epsilon, AlphaFormula formula) {
  if (std::isnan(epsilon) || epsilon <= 0.0) {
    throw ParameterError("epsilon must be positive, got " +
                         std::to_string(epsilon));
  }
  if (std::isinf(epsilon)) return Noiseless();
  PrivacyBudget b;
  b.epsilon = epsilon;
  const double rate =
      formula == AlphaFormula::kConsistent ? epsilon / 2.0 : 2.0 / epsilon;
  b.alpha = std::exp(-rate);
  if (!(b.alpha > 0.0)) b.alpha = kAlphaFloor;
  b.kappa = 2.0 / rate;
  return b;
}

PrivacyBudget PrivacyBudget::Noiseless() {
  PrivacyBudget b;
  b.epsilon = std::numeric_limits<double>::infinity();
  b.alpha = 0.0;
  b.kappa = 0.0;
  return b;
}

double PrivacyBudget::NoiseVariance() const {
  return 2.0 * alpha / ((1.0 - alpha) * (1.0 - alpha));
}

double PrivacyBudget::SumNoiseVariance(int n) const {
  return static_cast<double>(2 * n - 1) * NoiseVariance();
}

NoisyDegrees ExactDegrees(const DirectedGraph& g) {
  DegreeSequences deg = Degrees(g);
  return {std::move(deg.out), std::move(deg.in)};
}

NoisyDegrees ReleaseBidegree(const DirectedGraph& g,
                             const PrivacyBudget& budget, std::uint64_t seed) {
  NoisyDegrees out = ExactDegrees(g);
  if (budget.noiseless()) return out;
  const DiscreteLaplace noise(budget.alpha);
  Rng rng = MakeRng(seed, Stream::kNoise);
  for (int i = 0; i < g.n(); ++i) {
    out.d_tilde[i] += noise.Sample(rng);
    out.b_tilde[i] += noise.Sample(rng);
  }
  return out;
}

}  // namespace dpdg
