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

#include "epidp/sbm.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace epidp {

void SbmParams::Validate() const {
  if (edge_prob.rows() != edge_prob.cols()) {
    throw std::invalid_argument("SBM probability matrix must be square");
  }
  for (Eigen::Index i = 0; i < edge_prob.rows(); ++i) {
    for (Eigen::Index j = 0; j < edge_prob.cols(); ++j) {
      const double p = edge_prob(i, j);
      if (!(p >= 0 && p <= 1)) {
        throw std::invalid_argument("SBM probability outside [0, 1]");
      }
      if (p != edge_prob(j, i)) {
        throw std::invalid_argument("SBM probability matrix not symmetric");
      }
    }
  }
}

Eigen::MatrixXd PairCounts(std::span<const std::int64_t> group_sizes) {
  const auto k = static_cast<Eigen::Index>(group_sizes.size());
  Eigen::MatrixXd pairs(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double ni = static_cast<double>(group_sizes[i]);
    for (Eigen::Index j = 0; j < k; ++j) {
      pairs(i, j) = i == j ? ni * (ni - 1) / 2
                           : ni * static_cast<double>(group_sizes[j]);
    }
  }
  return pairs;
}

SbmParams FitSbm(const Eigen::MatrixXd& mixing, std::string attr,
                 std::span<const std::int64_t> group_sizes) {
  const auto k = static_cast<Eigen::Index>(group_sizes.size());
  if (mixing.rows() != k || mixing.cols() != k) {
    throw std::invalid_argument("mixing matrix shape does not match schema");
  }
  const Eigen::MatrixXd pairs = PairCounts(group_sizes);
  SbmParams params{std::move(attr), Eigen::MatrixXd::Zero(k, k)};
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i; j < k; ++j) {
      if (mixing(i, j) != mixing(j, i)) {
        throw std::invalid_argument("mixing matrix not symmetric");
      }
      if (pairs(i, j) <= 0) continue;
      const double p = std::clamp(mixing(i, j) / pairs(i, j), 0.0, 1.0);
      params.edge_prob(i, j) = p;
      params.edge_prob(j, i) = p;
    }
  }
  return params;
}

std::vector<StatKind> SbmStatistics(const AttributeSchema& schema) {
  std::vector<StatKind> kinds;
  const int k = static_cast<int>(schema.size());
  for (int i = 0; i < k; ++i) {
    for (int j = i; j < k; ++j) kinds.push_back(StatKind::Mixing(schema.name, i, j));
  }
  return kinds;
}

Eigen::MatrixXd MixingFromRelease(const PrivateRelease& release,
                                  const std::string& attr, std::size_t groups) {
  const auto k = static_cast<Eigen::Index>(groups);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i; j < k; ++j) {
      const double v = release.ValueOf(
          StatKind::Mixing(attr, static_cast<int>(i), static_cast<int>(j)));
      m(i, j) = v;
      m(j, i) = v;
    }
  }
  return m;
}

AttributedGraph SampleSbm(const SbmParams& params,
                          const AttributedGraph& population, Rng& rng) {
  params.Validate();
  const std::size_t attr = population.AttributeIndex(params.attr);
  if (static_cast<std::size_t>(params.edge_prob.rows()) !=
      population.schema(attr).size()) {
    throw std::invalid_argument("SBM size does not match attribute groups");
  }
  const auto labels = population.labels(attr);
  const auto n = static_cast<NodeId>(population.node_count());
  std::vector<Edge> edges;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      if (rng.Bernoulli(params.edge_prob(labels[u], labels[v]))) {
        edges.emplace_back(u, v);
      }
    }
  }
  return population.WithEdges(std::move(edges));
}

nlohmann::json ToJson(const SbmParams& params) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < params.edge_prob.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < params.edge_prob.cols(); ++j) {
      row.push_back(params.edge_prob(i, j));
    }
    rows.push_back(std::move(row));
  }
  return {{"family", "sbm"}, {"attribute", params.attr}, {"edge_prob", rows}};
}

SbmParams SbmFromJson(const nlohmann::json& j) {
  if (j.at("family").get<std::string>() != "sbm") {
    throw std::invalid_argument("not an SBM model document");
  }
  SbmParams params;
  params.attr = j.at("attribute").get<std::string>();
  const auto& rows = j.at("edge_prob");
  const auto k = static_cast<Eigen::Index>(rows.size());
  params.edge_prob.resize(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    if (rows[i].size() != static_cast<std::size_t>(k)) {
      throw std::invalid_argument("edge_prob must be square");
    }
    for (Eigen::Index j2 = 0; j2 < k; ++j2) {
      params.edge_prob(i, j2) = rows[i][j2].get<double>();
    }
  }
  params.Validate();
  return params;
}

}  // namespace epidp
