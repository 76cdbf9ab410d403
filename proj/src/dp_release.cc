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

#include "epidp/dp_release.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "epidp/csv.h"

namespace epidp {

PrivacyBudget PrivacyBudget::Finite(double epsilon) {
  if (!std::isfinite(epsilon) || epsilon <= 0) {
    throw std::invalid_argument("epsilon must be finite and positive, got " +
                                FormatDouble(epsilon));
  }
  return PrivacyBudget(epsilon);
}

PrivacyBudget PrivacyBudget::Parse(std::string_view text) {
  if (text == "inf" || text == "Inf" || text == "INF" || text == "infinity") {
    return Infinite();
  }
  double value;
  try {
    value = ParseDouble(text);
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("bad epsilon '" + std::string(text) + "'");
  }
  return Finite(value);
}

double PrivacyBudget::value() const {
  if (!epsilon_) throw std::logic_error("infinite budget has no finite value");
  return *epsilon_;
}

double PrivacyBudget::AsDouble() const {
  return epsilon_ ? *epsilon_ : std::numeric_limits<double>::infinity();
}

std::string PrivacyBudget::ToString() const {
  return epsilon_ ? FormatDouble(*epsilon_) : "inf";
}

void ReleaseSpec::Validate() const {
  if (statistics.empty()) {
    throw std::invalid_argument("release spec lists no statistics");
  }
  if (delta_cap < 1) throw std::invalid_argument("delta_cap must be >= 1");
  std::set<StatKind> seen(statistics.begin(), statistics.end());
  if (seen.size() != statistics.size()) {
    throw std::invalid_argument("release spec lists a statistic twice");
  }
}

std::vector<StatKind> PrivateRelease::kinds() const {
  std::vector<StatKind> out;
  out.reserve(statistics.size());
  for (const auto& s : statistics) out.push_back(s.kind);
  return out;
}

std::vector<double> PrivateRelease::values() const {
  std::vector<double> out;
  out.reserve(statistics.size());
  for (const auto& s : statistics) out.push_back(s.value);
  return out;
}

double PrivateRelease::ValueOf(const StatKind& kind) const {
  for (const auto& s : statistics) {
    if (s.kind == kind) return s.value;
  }
  throw std::out_of_range("statistic " + kind.Descriptor() + " not released");
}

AttributedGraph TruncateDegree(const AttributedGraph& g, int delta_cap) {
  if (delta_cap < 1) throw std::invalid_argument("delta_cap must be >= 1");
  const auto cap = static_cast<std::size_t>(delta_cap);
  if (g.max_degree() <= cap) return g;
  std::vector<std::size_t> kept_degree(g.node_count(), 0);
  std::vector<Edge> kept;
  kept.reserve(g.edge_count());
  // g.edges() is already in canonical order.
  for (const Edge& e : g.edges()) {
    if (kept_degree[e.u] < cap && kept_degree[e.v] < cap) {
      kept.push_back(e);
      ++kept_degree[e.u];
      ++kept_degree[e.v];
    }
  }
  return g.WithEdges(std::move(kept));
}

std::int64_t GlobalSensitivity(const StatKind& kind, int delta_cap) {
  if (delta_cap < 1) throw std::invalid_argument("delta_cap must be >= 1");
  const std::int64_t delta = delta_cap;
  switch (kind.type) {
    case StatType::kEdges:
    case StatType::kMixing:
    case StatType::kNodematch:
    case StatType::kTotalNodematch:
      return delta;
    case StatType::kMinDegree:
      return delta + 1;
    case StatType::kNodefactor:
      return 2 * delta;
  }
  throw std::invalid_argument("unknown statistic kind");
}

double LaplaceFromUniform(double u, double scale) {
  if (!(u > 0 && u < 1)) throw std::invalid_argument("u must lie in (0, 1)");
  if (u < 0.5) return scale * std::log(2.0 * u);
  if (u == 0.5) return 0.0;
  return -scale * std::log(2.0 * (1.0 - u));
}

double SampleLaplace(Rng& rng, double scale) {
  if (!(scale > 0) || !std::isfinite(scale)) {
    throw std::invalid_argument("Laplace scale must be positive and finite");
  }
  return LaplaceFromUniform(rng.UniformOpen(), scale);
}

std::vector<double> AllocateBudget(std::span<const StatKind> kinds,
                                   double epsilon, int delta_cap) {
  if (kinds.empty()) throw std::invalid_argument("no statistics to allocate");
  if (!std::isfinite(epsilon) || epsilon <= 0) {
    throw std::invalid_argument("epsilon must be finite and positive");
  }
  std::int64_t total = 0;
  for (const auto& k : kinds) total += GlobalSensitivity(k, delta_cap);
  std::vector<double> shares;
  shares.reserve(kinds.size());
  for (const auto& k : kinds) {
    shares.push_back(epsilon * static_cast<double>(GlobalSensitivity(k, delta_cap)) /
                     static_cast<double>(total));
  }
  return shares;
}

PrivateRelease ReleaseStatistics(const AttributedGraph& g,
                                 const ReleaseSpec& spec, Rng& rng) {
  spec.Validate();
  const AttributedGraph projected = TruncateDegree(g, spec.delta_cap);
  const std::vector<std::int64_t> exact =
      ComputeStatistics(projected, spec.statistics);

  PrivateRelease release;
  release.epsilon = spec.epsilon;
  release.delta_cap = spec.delta_cap;
  release.seed = rng.seed();
  release.statistics.reserve(exact.size());

  if (spec.epsilon.is_infinite()) {
    for (std::size_t s = 0; s < exact.size(); ++s) {
      release.statistics.push_back(
          {spec.statistics[s], static_cast<double>(exact[s]),
           std::numeric_limits<double>::infinity(),
           GlobalSensitivity(spec.statistics[s], spec.delta_cap), 0.0});
    }
    return release;
  }

  const double epsilon = spec.epsilon.value();
  const std::vector<double> shares =
      AllocateBudget(spec.statistics, epsilon, spec.delta_cap);
  std::int64_t total_sensitivity = 0;
  for (const auto& k : spec.statistics) {
    total_sensitivity += GlobalSensitivity(k, spec.delta_cap);
  }
  // GS_i / eps_i is identical for every statistic under the allocation.
  const double scale = static_cast<double>(total_sensitivity) / epsilon;
  for (std::size_t s = 0; s < exact.size(); ++s) {
    const double noisy = static_cast<double>(exact[s]) + SampleLaplace(rng, scale);
    release.statistics.push_back(
        {spec.statistics[s], std::max(0.0, noisy), shares[s],
         GlobalSensitivity(spec.statistics[s], spec.delta_cap), scale});
  }
  return release;
}

PrivateRelease ExactRelease(const AttributedGraph& g,
                            std::span<const StatKind> kinds) {
  const std::vector<std::int64_t> exact = ComputeStatistics(g, kinds);
  PrivateRelease release;
  release.delta_cap = 0;
  for (std::size_t s = 0; s < exact.size(); ++s) {
    release.statistics.push_back({kinds[s], static_cast<double>(exact[s]),
                                  std::numeric_limits<double>::infinity(), 0,
                                  0.0});
  }
  return release;
}

namespace {

nlohmann::json NumberOrTag(double x) {
  if (std::isfinite(x)) return x;
  return FormatDouble(x);
}

double NumberFromJson(const nlohmann::json& j) {
  if (j.is_string()) return ParseDouble(j.get<std::string>());
  return j.get<double>();
}

}  // namespace

nlohmann::json ToJson(const PrivacyBudget& budget) {
  if (budget.is_infinite()) return "inf";
  return budget.value();
}

PrivacyBudget BudgetFromJson(const nlohmann::json& j) {
  if (j.is_string()) return PrivacyBudget::Parse(j.get<std::string>());
  return PrivacyBudget::Finite(j.get<double>());
}

nlohmann::json ToJson(const PrivateRelease& release) {
  nlohmann::json stats = nlohmann::json::array();
  for (const auto& s : release.statistics) {
    stats.push_back({{"kind", s.kind.Descriptor()},
                     {"value", s.value},
                     {"epsilon", NumberOrTag(s.epsilon_share)},
                     {"sensitivity", s.sensitivity},
                     {"noise_scale", s.noise_scale}});
  }
  nlohmann::json j;
  j["format"] = "epidp.private_release/1";
  j["epsilon"] = ToJson(release.epsilon);
  j["delta_cap"] = release.delta_cap;
  j["seed"] = release.seed;
  j["seed_path"] = release.seed_path;
  j["timestamp"] = release.timestamp ? nlohmann::json(*release.timestamp)
                                     : nlohmann::json(nullptr);
  j["statistics"] = std::move(stats);
  return j;
}

PrivateRelease ReleaseFromJson(const nlohmann::json& j) {
  PrivateRelease release;
  release.epsilon = BudgetFromJson(j.at("epsilon"));
  release.delta_cap = j.at("delta_cap").get<int>();
  release.seed = j.value("seed", std::uint64_t{0});
  release.seed_path = j.value("seed_path", std::string());
  if (j.contains("timestamp") && !j.at("timestamp").is_null()) {
    release.timestamp = j.at("timestamp").get<std::string>();
  }
  for (const auto& s : j.at("statistics")) {
    ReleasedStatistic r;
    r.kind = StatKind::Parse(s.at("kind").get<std::string>());
    r.value = s.at("value").get<double>();
    r.epsilon_share = NumberFromJson(s.at("epsilon"));
    r.sensitivity = s.at("sensitivity").get<std::int64_t>();
    r.noise_scale = s.at("noise_scale").get<double>();
    release.statistics.push_back(std::move(r));
  }
  return release;
}

}  // namespace epidp
