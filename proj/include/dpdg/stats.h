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

#ifndef DPDG_STATS_H_
#define DPDG_STATS_H_

#include <span>
#include <vector>

namespace dpdg {

double NormalCdf(double x);
double NormalQuantile(double prob);
// Two-sided p-value of a standard normal statistic.
double TwoSidedPValue(double z);

// sup_x |F_m(x) - Phi(x)| for the empirical distribution of `sample`.
double KolmogorovSmirnovNormal(std::span<const double> sample);

// Upper tail of the chi-square distribution with `dof` degrees of freedom.
double ChiSquareSurvival(double statistic, double dof);

double Mean(std::span<const double> x);
// Unbiased sample variance; needs at least two values.
double SampleVariance(std::span<const double> x);

}  // namespace dpdg

#endif  // DPDG_STATS_H_
