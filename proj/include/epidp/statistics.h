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

#ifndef EPIDP_STATISTICS_H_
#define EPIDP_STATISTICS_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "epidp/graph.h"

namespace epidp {

using CountMatrix =
    Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

enum class StatType {
  kEdges,
  kMinDegree,       // nodes with degree >= d
  kMixing,          // mixing matrix entry (attr, i, j), i <= j
  kNodematch,       // edges with both endpoints in group i
  kTotalNodematch,  // edges whose endpoints share a group
  kNodefactor,      // edges with at least one endpoint in group i
};

// Identifies one scalar network statistic. Vector statistics are unpacked
// into one StatKind per component.
//
// Text form (see Descriptor/Parse):
//   edges | min_degree(d) | mixing(attr,i,j) | nodematch(attr,i)
//   | total_nodematch(attr) | nodefactor(attr,i)
// with i, j zero-based category indices.
struct StatKind {
  StatType type = StatType::kEdges;
  std::string attr;
  int i = 0;  // degree threshold for kMinDegree, group otherwise
  int j = 0;  // second group, kMixing only

  static StatKind Edges() { return {StatType::kEdges, "", 0, 0}; }
  static StatKind MinDegree(int d) { return {StatType::kMinDegree, "", d, 0}; }
  static StatKind Mixing(std::string attr, int i, int j);
  static StatKind Nodematch(std::string attr, int i) {
    return {StatType::kNodematch, std::move(attr), i, 0};
  }
  static StatKind TotalNodematch(std::string attr) {
    return {StatType::kTotalNodematch, std::move(attr), 0, 0};
  }
  static StatKind Nodefactor(std::string attr, int i) {
    return {StatType::kNodefactor, std::move(attr), i, 0};
  }

  std::string Descriptor() const;
  static StatKind Parse(std::string_view text);

  friend bool operator==(const StatKind&, const StatKind&) = default;
  friend auto operator<=>(const StatKind&, const StatKind&) = default;
};

std::int64_t CountEdges(const AttributedGraph& g);
// Requires d >= 1.
std::int64_t CountNodesWithMinDegree(const AttributedGraph& g, int d);
// Symmetric k x k; the diagonal counts each within-group edge once.
CountMatrix MixingMatrix(const AttributedGraph& g, std::string_view attr);
std::vector<std::int64_t> NodematchPerGroup(const AttributedGraph& g,
                                            std::string_view attr);
std::int64_t TotalNodematch(const AttributedGraph& g, std::string_view attr);
std::vector<std::int64_t> Nodefactor(const AttributedGraph& g,
                                     std::string_view attr);
// hist[d] = number of nodes of degree d; length max_degree + 1.
std::vector<std::int64_t> DegreeHistogram(const AttributedGraph& g);

// Exact value of one statistic. Throws std::invalid_argument for unknown
// attributes or out-of-range groups.
std::int64_t ComputeStatistic(const AttributedGraph& g, const StatKind& kind);
// Batch evaluation sharing per-attribute mixing matrices.
std::vector<std::int64_t> ComputeStatistics(const AttributedGraph& g,
                                            std::span<const StatKind> kinds);

// Relative percent difference of synthetic vs observed for: "edges",
// "concurrent" (nodes with degree >= 2), and "homophily_<attr>" (total
// nodematch) per listed attribute. nullopt when the observed value is 0.
using QualityMetrics = std::map<std::string, std::optional<double>>;
QualityMetrics ComputeQualityMetrics(const AttributedGraph& synthetic,
                                     const AttributedGraph& observed,
                                     std::span<const std::string> attrs);

}  // namespace epidp

#endif  // EPIDP_STATISTICS_H_
