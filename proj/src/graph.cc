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

#include "epidp/graph.h"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "epidp/csv.h"

namespace epidp {

int AttributeSchema::IndexOf(std::string_view label) const {
  for (std::size_t i = 0; i < categories.size(); ++i) {
    if (categories[i] == label) return static_cast<int>(i);
  }
  throw std::invalid_argument("attribute '" + name + "' has no category '" +
                              std::string(label) + "'");
}

void AttributeSchema::Validate() const {
  if (name.empty()) throw std::invalid_argument("attribute name is empty");
  if (categories.empty()) {
    throw std::invalid_argument("attribute '" + name + "' has no categories");
  }
  std::set<std::string> seen(categories.begin(), categories.end());
  if (seen.size() != categories.size()) {
    throw std::invalid_argument("attribute '" + name +
                                "' has duplicate categories");
  }
}

AttributedGraph::AttributedGraph(std::vector<AttributeSchema> schemas,
                                 std::vector<std::vector<int>> labels,
                                 std::vector<Edge> edges,
                                 std::vector<std::string> node_names)
    : schemas_(std::move(schemas)),
      labels_(std::move(labels)),
      node_names_(std::move(node_names)) {
  if (labels_.size() != schemas_.size()) {
    throw std::invalid_argument("one label vector per attribute required");
  }
  std::set<std::string_view> names;
  for (const auto& s : schemas_) {
    s.Validate();
    if (!names.insert(s.name).second) {
      throw std::invalid_argument("duplicate attribute '" + s.name + "'");
    }
  }
  if (!labels_.empty()) {
    node_count_ = labels_[0].size();
  } else {
    node_count_ = node_names_.size();
  }
  for (std::size_t a = 0; a < labels_.size(); ++a) {
    if (labels_[a].size() != node_count_) {
      throw std::invalid_argument("attribute '" + schemas_[a].name +
                                  "' does not cover every node");
    }
    for (int c : labels_[a]) {
      if (c < 0 || static_cast<std::size_t>(c) >= schemas_[a].size()) {
        throw std::invalid_argument("category index out of range for '" +
                                    schemas_[a].name + "'");
      }
    }
  }
  if (node_names_.empty()) {
    node_names_.reserve(node_count_);
    for (std::size_t v = 0; v < node_count_; ++v) {
      node_names_.push_back(std::to_string(v));
    }
  } else if (node_names_.size() != node_count_) {
    throw std::invalid_argument("node name count does not match node count");
  }

  for (const Edge& e : edges) {
    if (e.u == e.v) {
      throw std::invalid_argument("self-loop at node " + std::to_string(e.u));
    }
    if (e.v >= node_count_) {
      throw std::invalid_argument("edge endpoint " + std::to_string(e.v) +
                                  " out of range");
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges_ = std::move(edges);

  adjacency_.assign(node_count_, {});
  for (const Edge& e : edges_) {
    adjacency_[e.u].push_back(e.v);
    adjacency_[e.v].push_back(e.u);
  }
  for (auto& nbrs : adjacency_) std::sort(nbrs.begin(), nbrs.end());
}

std::size_t AttributedGraph::max_degree() const {
  std::size_t best = 0;
  for (const auto& nbrs : adjacency_) best = std::max(best, nbrs.size());
  return best;
}

bool AttributedGraph::HasEdge(NodeId a, NodeId b) const {
  if (a >= node_count_ || b >= node_count_ || a == b) return false;
  const auto& nbrs = adjacency_[a];
  return std::binary_search(nbrs.begin(), nbrs.end(), b);
}

std::size_t AttributedGraph::AttributeIndex(std::string_view name) const {
  for (std::size_t a = 0; a < schemas_.size(); ++a) {
    if (schemas_[a].name == name) return a;
  }
  throw std::invalid_argument("unknown attribute '" + std::string(name) + "'");
}

std::vector<std::int64_t> AttributedGraph::GroupSizes(std::size_t attr) const {
  std::vector<std::int64_t> sizes(schema(attr).size(), 0);
  for (int c : labels_[attr]) ++sizes[c];
  return sizes;
}

AttributedGraph AttributedGraph::WithEdges(std::vector<Edge> edges) const {
  return AttributedGraph(schemas_, labels_, std::move(edges), node_names_);
}

bool AttributedGraph::SameNodesAs(const AttributedGraph& other) const {
  if (node_count_ != other.node_count_) return false;
  if (schemas_.size() != other.schemas_.size()) return false;
  for (std::size_t a = 0; a < schemas_.size(); ++a) {
    if (schemas_[a].name != other.schemas_[a].name ||
        schemas_[a].categories != other.schemas_[a].categories) {
      return false;
    }
  }
  return labels_ == other.labels_;
}

bool operator==(const AttributedGraph& a, const AttributedGraph& b) {
  return a.SameNodesAs(b) &&
         std::equal(a.edges().begin(), a.edges().end(), b.edges().begin(),
                    b.edges().end());
}

AttributedGraph ParseGraph(std::string_view nodes_csv,
                           std::string_view edges_csv,
                           std::vector<AttributeSchema> schemas) {
  const CsvTable nodes = ParseCsv(nodes_csv, "nodes");
  const CsvTable edges = ParseCsv(edges_csv, "edges");
  auto where = [](const CsvTable& t, const CsvRow& r) {
    return t.source + ":" + std::to_string(r.line) + ": ";
  };

  const std::size_t id_col = nodes.Column("node_id");
  std::vector<std::size_t> attr_cols;
  if (schemas.empty()) {
    for (std::size_t c = 0; c < nodes.header.size(); ++c) {
      if (c == id_col) continue;
      attr_cols.push_back(c);
      schemas.push_back({nodes.header[c], {}});
    }
  } else {
    for (const auto& s : schemas) attr_cols.push_back(nodes.Column(s.name));
  }
  const bool infer = std::all_of(schemas.begin(), schemas.end(),
                                 [](const auto& s) { return s.categories.empty(); });

  std::unordered_map<std::string, NodeId> index;
  std::vector<std::string> names;
  std::vector<std::vector<int>> labels(schemas.size());
  for (const CsvRow& row : nodes.rows) {
    const std::string& id = row.fields[id_col];
    if (id.empty()) throw std::runtime_error(where(nodes, row) + "empty node_id");
    if (!index.emplace(id, static_cast<NodeId>(names.size())).second) {
      throw std::runtime_error(where(nodes, row) + "duplicate node_id '" + id +
                               "'");
    }
    names.push_back(id);
    for (std::size_t a = 0; a < schemas.size(); ++a) {
      const std::string& value = row.fields[attr_cols[a]];
      if (value.empty()) {
        throw std::runtime_error(where(nodes, row) + "missing value for '" +
                                 schemas[a].name + "'");
      }
      auto& cats = schemas[a].categories;
      auto it = std::find(cats.begin(), cats.end(), value);
      if (it == cats.end()) {
        if (!infer) {
          throw std::runtime_error(where(nodes, row) + "unknown category '" +
                                   value + "' for '" + schemas[a].name + "'");
        }
        cats.push_back(value);
        it = cats.end() - 1;
      }
      labels[a].push_back(static_cast<int>(it - cats.begin()));
    }
  }

  const std::size_t u_col = edges.Column("u");
  const std::size_t v_col = edges.Column("v");
  std::vector<Edge> edge_list;
  edge_list.reserve(edges.rows.size());
  for (const CsvRow& row : edges.rows) {
    const std::string& a = row.fields[u_col];
    const std::string& b = row.fields[v_col];
    if (a == b) throw std::runtime_error(where(edges, row) + "self-loop on '" + a + "'");
    auto ia = index.find(a);
    auto ib = index.find(b);
    if (ia == index.end() || ib == index.end()) {
      throw std::runtime_error(where(edges, row) + "unknown endpoint '" +
                               (ia == index.end() ? a : b) + "'");
    }
    edge_list.emplace_back(ia->second, ib->second);
  }
  if (names.empty()) {
    // Schema categories may be inferred empty when there are no nodes.
    for (auto& s : schemas) {
      if (s.categories.empty()) s.categories.push_back("NA");
    }
  }
  return AttributedGraph(std::move(schemas), std::move(labels),
                         std::move(edge_list), std::move(names));
}

AttributedGraph LoadGraph(const std::filesystem::path& nodes_csv,
                          const std::filesystem::path& edges_csv,
                          std::vector<AttributeSchema> schemas) {
  const std::string nodes_text = ReadTextFile(nodes_csv);
  const std::string edges_text = ReadTextFile(edges_csv);
  try {
    return ParseGraph(nodes_text, edges_text, std::move(schemas));
  } catch (const std::runtime_error& e) {
    std::string msg = e.what();
    // Substitute the real file names for the in-memory source tags.
    if (msg.rfind("nodes:", 0) == 0) {
      msg = nodes_csv.string() + msg.substr(5);
    } else if (msg.rfind("edges:", 0) == 0) {
      msg = edges_csv.string() + msg.substr(5);
    }
    throw std::runtime_error(msg);
  }
}

std::string NodesCsv(const AttributedGraph& g) {
  std::string out = "node_id";
  for (const auto& s : g.schemas()) out += "," + s.name;
  out += '\n';
  for (NodeId v = 0; v < g.node_count(); ++v) {
    out += g.node_name(v);
    for (std::size_t a = 0; a < g.schemas().size(); ++a) {
      out += ',';
      out += g.schema(a).categories[g.labels(a)[v]];
    }
    out += '\n';
  }
  return out;
}

std::string EdgesCsv(const AttributedGraph& g) {
  std::string out = "u,v\n";
  for (const Edge& e : g.edges()) {
    out += g.node_name(e.u);
    out += ',';
    out += g.node_name(e.v);
    out += '\n';
  }
  return out;
}

void WriteGraph(const AttributedGraph& g,
                const std::filesystem::path& nodes_csv,
                const std::filesystem::path& edges_csv) {
  WriteTextFile(nodes_csv, NodesCsv(g));
  WriteTextFile(edges_csv, EdgesCsv(g));
}

}  // namespace epidp
