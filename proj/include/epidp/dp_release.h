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

#ifndef EPIDP_DP_RELEASE_H_
#define EPIDP_DP_RELEASE_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "epidp/graph.h"
#include "epidp/random.h"
#include "epidp/statistics.h"
#include "json.hpp"

namespace epidp {

// Total privacy budget. Infinity is an explicit state, never a large double.
class PrivacyBudget {
 public:
  static PrivacyBudget Infinite() { return PrivacyBudget(); }
  // Throws std::invalid_argument unless epsilon is finite and > 0.
  static PrivacyBudget Finite(double epsilon);
  // Accepts "inf" or a positive decimal.
  static PrivacyBudget Parse(std::string_view text);

  bool is_infinite() const { return !epsilon_.has_value(); }
  // Requires !is_infinite().
  double value() const;
  // +infinity for the infinite budget.
  double AsDouble() const;
  std::string ToString() const;

  friend bool operator==(const PrivacyBudget&, const PrivacyBudget&) = default;

 private:
  PrivacyBudget() = default;
  explicit PrivacyBudget(double e) : epsilon_(e) {}
  std::optional<double> epsilon_;
};

struct ReleaseSpec {
  std::vector<StatKind> statistics;
  PrivacyBudget epsilon = PrivacyBudget::Infinite();
  int delta_cap = 1;

  // Throws std::invalid_argument on an empty statistic list or delta_cap < 1.
  void Validate() const;
};

struct ReleasedStatistic {
  StatKind kind;
  double value = 0;           // clipped noisy value (exact when eps = inf)
  double epsilon_share = 0;   // +inf when the total budget is infinite
  std::int64_t sensitivity = 0;
  double noise_scale = 0;     // sensitivity / epsilon_share; 0 when eps = inf
};

struct PrivateRelease {
  std::vector<ReleasedStatistic> statistics;
  PrivacyBudget epsilon = PrivacyBudget::Infinite();
  int delta_cap = 1;
  std::uint64_t seed = 0;
  std::string seed_path;
  std::optional<std::string> timestamp;

  std::vector<StatKind> kinds() const;
  std::vector<double> values() const;
  // Throws std::out_of_range if `kind` was not released.
  double ValueOf(const StatKind& kind) const;
};

// Degree projection: visits edges in canonical (lexicographic) order and
// keeps an edge iff both endpoints currently have fewer than delta_cap kept
// edges. Requires delta_cap >= 1.
AttributedGraph TruncateDegree(const AttributedGraph& g, int delta_cap);

// Node-level global sensitivity of `kind` over graphs of max degree
// delta_cap.
std::int64_t GlobalSensitivity(const StatKind& kind, int delta_cap);

// Inverse-CDF Laplace transform of a uniform u in (0, 1).
double LaplaceFromUniform(double u, double scale);
// One Lap(scale) draw. Requires scale > 0.
double SampleLaplace(Rng& rng, double scale);

// Splits a finite budget proportionally to global sensitivities, so every
// statistic ends up with the same noise scale sum(GS) / epsilon.
std::vector<double> AllocateBudget(std::span<const StatKind> kinds,
                                   double epsilon, int delta_cap);

// Projects g once at spec.delta_cap, evaluates every statistic on the
// projected graph, adds Laplace noise under the proportional allocation and
// clips at zero. With an infinite budget the exact projected values are
// returned.
PrivateRelease ReleaseStatistics(const AttributedGraph& g,
                                 const ReleaseSpec& spec, Rng& rng);

// Exact statistics of g without projection or noise, in release form.
PrivateRelease ExactRelease(const AttributedGraph& g,
                            std::span<const StatKind> kinds);

nlohmann::json ToJson(const PrivacyBudget& budget);
PrivacyBudget BudgetFromJson(const nlohmann::json& j);
nlohmann::json ToJson(const PrivateRelease& release);
PrivateRelease ReleaseFromJson(const nlohmann::json& j);

}  // namespace epidp

#endif  // EPIDP_DP_RELEASE_H_
