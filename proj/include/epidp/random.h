// Copyright 2026 The epidp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef EPIDP_RANDOM_H_
#define EPIDP_RANDOM_H_

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace epidp {

// Random stream used by every stochastic operation. Draws are produced from
// the raw 64-bit engine output so results do not depend on the standard
// library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  std::uint64_t NextU64() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of resolution.
  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1).
  double UniformOpen() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  bool Bernoulli(double p) { return Uniform() < p; }

  // Uniform integer on [0, n). Requires n > 0.
  std::uint64_t Below(std::uint64_t n);

  std::uint64_t seed() const { return seed_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
};

// One component of a seed derivation path.
using SeedPart = std::variant<std::int64_t, std::string>;

// Deterministically derives a child seed from a master seed and an ordered
// path of labels and indices. Distinct paths give unrelated seeds.
std::uint64_t DeriveSeed(std::uint64_t master_seed,
                         const std::vector<SeedPart>& path);

// Human-readable rendering of a derivation path, e.g. "dp/5/3/release=2".
std::string FormatSeedPath(const std::vector<SeedPart>& path);

}  // namespace epidp

#endif  // EPIDP_RANDOM_H_
