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

#ifndef DPDG_RANDOM_H_
#define DPDG_RANDOM_H_

#include <cstdint>
#include <random>

namespace dpdg {

using Rng = std::mt19937_64;

// Named sub-streams of one seed, so that e.g. the graph draw and the noise
// draw of a replication never share a generator.
enum class Stream : std::uint32_t {
  kGraph = 1,
  kNoise = 2,
  kCovariates = 3,
};

inline Rng MakeRng(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return Rng(seq);
}

}  // namespace dpdg

#endif  // DPDG_RANDOM_H_
