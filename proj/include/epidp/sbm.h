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

#ifndef EPIDP_SBM_H_
#define EPIDP_SBM_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "epidp/dp_release.h"
#include "epidp/graph.h"
#include "epidp/random.h"
#include "epidp/statistics.h"
#include "json.hpp"

namespace epidp {

// Stochastic block model over the groups of one attribute.
struct SbmParams {
  std::string attr;
  Eigen::MatrixXd edge_prob;  // symmetric, entries in [0, 1]

  void Validate() const;
};

// Number of vertex pairs between groups i and j: n_i * n_j off the diagonal,
// C(n_i, 2) on it.
Eigen::MatrixXd PairCounts(std::span<const std::int64_t> group_sizes);

// P_ij = clamp(M_ij / pairs_ij, 0, 1); 0 where a block has no pairs.
SbmParams FitSbm(const Eigen::MatrixXd& mixing, std::string attr,
                 std::span<const std::int64_t> group_sizes);

// The mixing-matrix entries (i <= j) of `attr`, in release order.
std::vector<StatKind> SbmStatistics(const AttributeSchema& schema);

// Reassembles the symmetric mixing matrix from released entries.
Eigen::MatrixXd MixingFromRelease(const PrivateRelease& release,
                                  const std::string& attr, std::size_t groups);

// Includes each unordered pair independently with the block probability of
// its endpoints' groups. Nodes and attributes are copied from `population`.
AttributedGraph SampleSbm(const SbmParams& params,
                          const AttributedGraph& population, Rng& rng);

nlohmann::json ToJson(const SbmParams& params);
SbmParams SbmFromJson(const nlohmann::json& j);

}  // namespace epidp

#endif  // EPIDP_SBM_H_
