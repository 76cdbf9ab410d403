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

#include "epidp/statistics.h"

#include <algorithm>
#include <charconv>
#include <stdexcept>

namespace epidp {
namespace {

int ParseInt(std::string_view s, std::string_view context) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument("bad integer '" + std::string(s) + "' in '" +
                                std::string(context) + "'");
  }
  return value;
}

std::vector<std::string_view> SplitArgs(std::string_view args) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = args.find(',', start);
    std::string_view part = args.substr(
        start, comma == std::string_view::npos ? std::string_view::npos
                                               : comma - start);
    while (!part.empty() && part.front() == ' ') part.remove_prefix(1);
    while (!part.empty() && part.back() == ' ') part.remove_suffix(1);
    out.push_back(part);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

void CheckGroup(const AttributedGraph& g, std::size_t attr, int i) {
  if (i < 0 || static_cast<std::size_t>(i) >= g.schema(attr).size()) {
    throw std::invalid_argument("group " + std::to_string(i) +
                                " out of range for attribute '" +
                                g.schema(attr).name + "'");
  }
}

CountMatrix MixingMatrixAt(const AttributedGraph& g, std::size_t attr) {
  const auto k = static_cast<Eigen::Index>(g.schema(attr).size());
  CountMatrix m = CountMatrix::Zero(k, k);
  const auto labels = g.labels(attr);
  for (const Edge& e : g.edges()) {
    const int a = labels[e.u];
    const int b = labels[e.v];
    ++m(a, b);
    if (a != b) ++m(b, a);
  }
  return m;
}

std::int64_t FromMixing(const CountMatrix& m, const StatKind& kind) {
  switch (kind.type) {
    case StatType::kMixing:
      return m(kind.i, kind.j);
    case StatType::kNodematch:
      return m(kind.i, kind.i);
    case StatType::kTotalNodematch:
      return m.diagonal().sum();
    case StatType::kNodefactor:
      // Row i counts the diagonal once and every cross-group edge once.
      return m.row(kind.i).sum();
    default:
      throw std::logic_error("not a mixing-derived statistic");
  }
}

}  // namespace

StatKind StatKind::Mixing(std::string attr, int i, int j) {
  if (i > j) std::swap(i, j);
  return {StatType::kMixing, std::move(attr), i, j};
}

std::string StatKind::Descriptor() const {
  switch (type) {
    case StatType::kEdges:
      return "edges";
    case StatType::kMinDegree:
      return "min_degree(" + std::to_string(i) + ")";
    case StatType::kMixing:
      return "mixing(" + attr + "," + std::to_string(i) + "," +
             std::to_string(j) + ")";
    case StatType::kNodematch:
      return "nodematch(" + attr + "," + std::to_string(i) + ")";
    case StatType::kTotalNodematch:
      return "total_nodematch(" + attr + ")";
    case StatType::kNodefactor:
      return "nodefactor(" + attr + "," + std::to_string(i) + ")";
  }
  throw std::logic_error("unhandled StatType");
}

StatKind StatKind::Parse(std::string_view text) {
  if (text == "edges") return Edges();
  const std::size_t open = text.find('(');
  if (open == std::string_view::npos || text.back() != ')') {
    throw std::invalid_argument("unknown statistic '" + std::string(text) +
                                "'");
  }
  const std::string_view name = text.substr(0, open);
  const auto args = SplitArgs(text.substr(open + 1, text.size() - open - 2));
  auto expect = [&](std::size_t n) {
    if (args.size() != n || args[0].empty()) {
      throw std::invalid_argument("wrong arguments in '" + std::string(text) +
                                  "'");
    }
  };
  if (name == "min_degree") {
    expect(1);
    const int d = ParseInt(args[0], text);
    if (d < 1) throw std::invalid_argument("min_degree threshold must be >= 1");
    return MinDegree(d);
  }
  if (name == "mixing") {
    expect(3);
    return Mixing(std::string(args[0]), ParseInt(args[1], text),
                  ParseInt(args[2], text));
  }
  if (name == "nodematch") {
    expect(2);
    return Nodematch(std::string(args[0]), ParseInt(args[1], text));
  }
  if (name == "total_nodematch") {
    expect(1);
    return TotalNodematch(std::string(args[0]));
  }
  if (name == "nodefactor") {
    expect(2);
    return Nodefactor(std::string(args[0]), ParseInt(args[1], text));
  }
  throw std::invalid_argument("unknown statistic '" + std::string(text) + "'");
}

std::int64_t CountEdges(const AttributedGraph& g) {
  return static_cast<std::int64_t>(g.edge_count());
}

std::int64_t CountNodesWithMinDegree(const AttributedGraph& g, int d) {
  if (d < 1) throw std::invalid_argument("degree threshold must be >= 1");
  std::int64_t count = 0;
  for (NodeId v = 0; v < g.node_count(); ++v) {
    if (g.degree(v) >= static_cast<std::size_t>(d)) ++count;
  }
  return count;
}

CountMatrix MixingMatrix(const AttributedGraph& g, std::string_view attr) {
  return MixingMatrixAt(g, g.AttributeIndex(attr));
}

std::vector<std::int64_t> NodematchPerGroup(const AttributedGraph& g,
                                            std::string_view attr) {
  const CountMatrix m = MixingMatrix(g, attr);
  std::vector<std::int64_t> out(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) out[i] = m(i, i);
  return out;
}

std::int64_t TotalNodematch(const AttributedGraph& g, std::string_view attr) {
  return MixingMatrix(g, attr).diagonal().sum();
}

std::vector<std::int64_t> Nodefactor(const AttributedGraph& g,
                                     std::string_view attr) {
  const CountMatrix m = MixingMatrix(g, attr);
  std::vector<std::int64_t> out(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) out[i] = m.row(i).sum();
  return out;
}

std::vector<std::int64_t> DegreeHistogram(const AttributedGraph& g) {
  std::vector<std::int64_t> hist(g.max_degree() + 1, 0);
  for (NodeId v = 0; v < g.node_count(); ++v) ++hist[g.degree(v)];
  return hist;
}

std::int64_t ComputeStatistic(const AttributedGraph& g, const StatKind& kind) {
  const StatKind one[] = {kind};
  return ComputeStatistics(g, one).front();
}

std::vector<std::int64_t> ComputeStatistics(const AttributedGraph& g,
                                            std::span<const StatKind> kinds) {
  std::map<std::size_t, CountMatrix> mixing;
  std::vector<std::int64_t> out;
  out.reserve(kinds.size());
  for (const StatKind& kind : kinds) {
    switch (kind.type) {
      case StatType::kEdges:
        out.push_back(CountEdges(g));
        continue;
      case StatType::kMinDegree:
        out.push_back(CountNodesWithMinDegree(g, kind.i));
        continue;
      default:
        break;
    }
    const std::size_t attr = g.AttributeIndex(kind.attr);
    if (kind.type != StatType::kTotalNodematch) CheckGroup(g, attr, kind.i);
    if (kind.type == StatType::kMixing) CheckGroup(g, attr, kind.j);
    auto it = mixing.find(attr);
    if (it == mixing.end()) {
      it = mixing.emplace(attr, MixingMatrixAt(g, attr)).first;
    }
    out.push_back(FromMixing(it->second, kind));
  }
  return out;
}

QualityMetrics ComputeQualityMetrics(const AttributedGraph& synthetic,
                                     const AttributedGraph& observed,
                                     std::span<const std::string> attrs) {
  if (synthetic.node_count() != observed.node_count()) {
    throw std::invalid_argument("quality metrics need equal node counts");
  }
  for (const std::string& attr : attrs) {
    const auto& a = synthetic.schema(synthetic.AttributeIndex(attr));
    const auto& b = observed.schema(observed.AttributeIndex(attr));
    if (a.categories != b.categories) {
      throw std::invalid_argument("schema mismatch for attribute '" + attr +
                                  "'");
    }
  }
  auto relative = [](std::int64_t syn, std::int64_t obs) -> std::optional<double> {
    if (obs == 0) return std::nullopt;
    return 100.0 * static_cast<double>(syn - obs) / static_cast<double>(obs);
  };
  QualityMetrics out;
  out["edges"] = relative(CountEdges(synthetic), CountEdges(observed));
  out["concurrent"] = relative(CountNodesWithMinDegree(synthetic, 2),
                               CountNodesWithMinDegree(observed, 2));
  for (const std::string& attr : attrs) {
    out["homophily_" + attr] =
        relative(TotalNodematch(synthetic, attr), TotalNodematch(observed, attr));
  }
  return out;
}

}  // namespace epidp
