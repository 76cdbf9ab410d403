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

#include "epidp/random.h"

#include <stdexcept>

namespace epidp {
namespace {

// SplitMix64 finalizer.
std::uint64_t Mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t HashBytes(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a offset basis
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return Mix(h);
}

}  // namespace

std::uint64_t Rng::Below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("Rng::Below requires n > 0");
  // Lemire's multiply-shift with rejection; exact and almost division-free.
  unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(engine_()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

std::uint64_t DeriveSeed(std::uint64_t master_seed,
                         const std::vector<SeedPart>& path) {
  std::uint64_t h = Mix(master_seed ^ 0x6a09e667f3bcc909ULL);
  for (const SeedPart& part : path) {
    std::uint64_t component;
    if (const auto* i = std::get_if<std::int64_t>(&part)) {
      component = Mix(static_cast<std::uint64_t>(*i) ^ 0x3c6ef372fe94f82bULL);
    } else {
      component = HashBytes(std::get<std::string>(part));
    }
    h = Mix(h ^ component) + 0x9e3779b97f4a7c15ULL * (h >> 17 | 1);
    h = Mix(h);
  }
  return h;
}

std::string FormatSeedPath(const std::vector<SeedPart>& path) {
  std::string out;
  for (const SeedPart& part : path) {
    if (!out.empty()) out += '/';
    if (const auto* i = std::get_if<std::int64_t>(&part)) {
      out += std::to_string(*i);
    } else {
      out += std::get<std::string>(part);
    }
  }
  return out;
}

}  // namespace epidp
