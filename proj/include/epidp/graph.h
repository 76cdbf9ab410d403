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

#ifndef EPIDP_GRAPH_H_
#define EPIDP_GRAPH_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace epidp {

using NodeId = std::uint32_t;

// Undirected edge stored with u < v.
struct Edge {
  NodeId u = 0;
  NodeId v = 0;

  Edge() = default;
  Edge(NodeId a, NodeId b) : u(a < b ? a : b), v(a < b ? b : a) {}

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

// A categorical node attribute. Categories are declared up front so empty
// groups stay representable and matrix shapes are stable.
struct AttributeSchema {
  std::string name;
  std::vector<std::string> categories;

  std::size_t size() const { return categories.size(); }
  // Index of `label` in `categories`; throws std::invalid_argument if absent.
  int IndexOf(std::string_view label) const;
  void Validate() const;
};

// Simple undirected graph whose nodes carry one category per declared
// attribute. Immutable after construction.
class AttributedGraph {
 public:
  AttributedGraph() = default;

  // `labels[a][v]` is the category index of node v for attribute a. Edges may
  // arrive in any order and orientation; duplicates collapse. Throws on
  // self-loops, out-of-range endpoints or labels.
  AttributedGraph(std::vector<AttributeSchema> schemas,
                  std::vector<std::vector<int>> labels,
                  std::vector<Edge> edges,
                  std::vector<std::string> node_names = {});

  std::size_t node_count() const { return node_count_; }
  std::size_t edge_count() const { return edges_.size(); }

  // Edges in canonical order: lexicographic by (min endpoint, max endpoint).
  std::span<const Edge> edges() const { return edges_; }
  std::span<const NodeId> neighbors(NodeId v) const {
    return {adjacency_[v].data(), adjacency_[v].size()};
  }
  std::size_t degree(NodeId v) const { return adjacency_[v].size(); }
  std::size_t max_degree() const;
  bool HasEdge(NodeId a, NodeId b) const;

  std::span<const AttributeSchema> schemas() const { return schemas_; }
  const AttributeSchema& schema(std::size_t attr) const {
    return schemas_.at(attr);
  }
  // Index of the attribute called `name`; throws std::invalid_argument.
  std::size_t AttributeIndex(std::string_view name) const;
  std::span<const int> labels(std::size_t attr) const {
    return labels_.at(attr);
  }
  const std::vector<std::vector<int>>& all_labels() const { return labels_; }
  // Node count per category of attribute `attr`.
  std::vector<std::int64_t> GroupSizes(std::size_t attr) const;

  const std::string& node_name(NodeId v) const { return node_names_[v]; }
  std::span<const std::string> node_names() const { return node_names_; }

  // Same nodes and attributes with a different edge set.
  AttributedGraph WithEdges(std::vector<Edge> edges) const;
  AttributedGraph WithoutEdges() const { return WithEdges({}); }

  bool SameNodesAs(const AttributedGraph& other) const;

 private:
  std::size_t node_count_ = 0;
  std::vector<AttributeSchema> schemas_;
  std::vector<std::vector<int>> labels_;
  std::vector<std::string> node_names_;
  std::vector<Edge> edges_;
  std::vector<std::vector<NodeId>> adjacency_;
};

bool operator==(const AttributedGraph& a, const AttributedGraph& b);

// Reads a node CSV (`node_id,<attr>,...`) and an edge CSV (`u,v`). When
// `schemas` is empty, categories are inferred in order of first appearance.
// Errors carry the offending file name and line number.
AttributedGraph LoadGraph(const std::filesystem::path& nodes_csv,
                          const std::filesystem::path& edges_csv,
                          std::vector<AttributeSchema> schemas = {});

// Same as LoadGraph but from in-memory CSV text.
AttributedGraph ParseGraph(std::string_view nodes_csv,
                           std::string_view edges_csv,
                           std::vector<AttributeSchema> schemas = {});

void WriteGraph(const AttributedGraph& g,
                const std::filesystem::path& nodes_csv,
                const std::filesystem::path& edges_csv);

std::string NodesCsv(const AttributedGraph& g);
std::string EdgesCsv(const AttributedGraph& g);

}  // namespace epidp

#endif  // EPIDP_GRAPH_H_
