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

#include "dpdg/stats.h"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "dpdg/errors.h"

namespace dpdg {

double NormalCdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double NormalQuantile(double prob) {
  if (!(prob > 0.0 && prob < 1.0)) {
    throw DomainError("normal quantile needs a probability in (0, 1)");
  }
  return boost::math::quantile(boost::math::normal_distribution<double>(), prob);
}

double TwoSidedPValue(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

double KolmogorovSmirnovNormal(std::span<const double> sample) {
  if (sample.empty()) throw DomainError("KS distance of an empty sample");
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  const double m = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    const double f = NormalCdf(sorted[k]);
    d = std::max({d, (k + 1) / m - f, f - k / m});
  }
  return d;
}

double ChiSquareSurvival(double statistic, double dof) {
  return boost::math::cdf(
      boost::math::complement(boost::math::chi_squared(dof), statistic));
}

double Mean(std::span<const double> x) {
  if (x.empty()) throw DomainError("mean of an empty sample");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double SampleVariance(std::span<const double> x) {
  if (x.size() < 2) throw DomainError("variance needs at least two values");
  const double mu = Mean(x);
  double s = 0.0;
  for (double v : x) s += (v - mu) * (v - mu);
  return s / static_cast<double>(x.size() - 1);
}

}  // namespace dpdg
