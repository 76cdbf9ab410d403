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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <set>
#include <string>
#include <unordered_set>

#include "epidp/csv.h"
#include "epidp/graph.h"
#include "epidp/random.h"
#include "epidp/statistics.h"
#include "fixtures.h"
#include "oracles.h"

using namespace epidp;

TEST_CASE("shape example statistics") {
  const AttributedGraph g = fixture::ShapeGraph();
  REQUIRE(g.node_count() == 7);
  REQUIRE(g.edge_count() == 8);
  CHECK(g.schema(0).categories ==
        std::vector<std::string>{"circle", "square", "diamond"});

  const CountMatrix m = MixingMatrix(g, "shape");
  const std::int64_t want[3][3] = {{2, 2, 0}, {2, 1, 2}, {0, 2, 1}};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) CHECK(m(i, j) == want[i][j]);
  }
  CHECK(NodematchPerGroup(g, "shape") == std::vector<std::int64_t>{2, 1, 1});
  CHECK(TotalNodematch(g, "shape") == 4);
  CHECK(Nodefactor(g, "shape") == std::vector<std::int64_t>{4, 5, 3});
  CHECK(CountNodesWithMinDegree(g, 2) == 7);
  CHECK(CountNodesWithMinDegree(g, 3) == 2);
  CHECK(DegreeHistogram(g) == std::vector<std::int64_t>{0, 0, 5, 2});
  CHECK(g.max_degree() == 3);
}

TEST_CASE("statistics agree with edge-scan oracle on random graphs") {
  for (std::uint32_t seed = 1; seed <= 60; ++seed) {
    const int groups = 1 + seed % 4;
    const oracle::Plain p =
        oracle::RandomPlain(5 + seed % 30, 0.05 + 0.01 * (seed % 20), groups,
                            seed);
    const AttributedGraph g = oracle::ToGraph(p, groups);
    CHECK(CountEdges(g) == static_cast<std::int64_t>(p.edges.size()));
    for (int d = 1; d <= 5; ++d) {
      CHECK(CountNodesWithMinDegree(g, d) == p.MinDegree(d));
    }
    long total = 0;
    for (int i = 0; i < groups; ++i) {
      for (int j = i; j < groups; ++j) {
        CHECK(ComputeStatistic(g, StatKind::Mixing("g", i, j)) ==
              p.Mixing(i, j));
      }
      CHECK(ComputeStatistic(g, StatKind::Nodematch("g", i)) == p.Nodematch(i));
      CHECK(ComputeStatistic(g, StatKind::Nodefactor("g", i)) ==
            p.Nodefactor(i));
      total += p.Nodematch(i);
    }
    CHECK(TotalNodematch(g, "g") == p.TotalNodematch());
    CHECK(total == p.TotalNodematch());

    std::vector<std::int64_t> hist(g.max_degree() + 1, 0);
    for (int d : p.Degrees()) ++hist[d];
    CHECK(DegreeHistogram(g) == hist);
  }
}

TEST_CASE("batch evaluation matches single evaluation") {
  const oracle::Plain p = oracle::RandomPlain(40, 0.1, 3, 7);
  const AttributedGraph g = oracle::ToGraph(p, 3);
  const std::vector<StatKind> kinds = {
      StatKind::Edges(),           StatKind::MinDegree(3),
      StatKind::Mixing("g", 2, 0), StatKind::Nodematch("g", 1),
      StatKind::TotalNodematch("g"), StatKind::Nodefactor("g", 2)};
  const auto batch = ComputeStatistics(g, kinds);
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    CHECK(batch[k] == ComputeStatistic(g, kinds[k]));
  }
}

TEST_CASE("stat descriptors round trip") {
  const std::vector<StatKind> kinds = {
      StatKind::Edges(), StatKind::MinDegree(4), StatKind::Mixing("age", 3, 1),
      StatKind::Nodematch("age", 0), StatKind::TotalNodematch("race"),
      StatKind::Nodefactor("race", 2)};
  for (const auto& k : kinds) CHECK(StatKind::Parse(k.Descriptor()) == k);
  CHECK(StatKind::Mixing("a", 3, 1).i == 1);
  CHECK_THROWS(StatKind::Parse("edges("));
  CHECK_THROWS(StatKind::Parse("min_degree(0)"));
  CHECK_THROWS(StatKind::Parse("triangles"));
}

TEST_CASE("unknown attributes and groups are rejected") {
  const AttributedGraph g = fixture::ShapeGraph();
  CHECK_THROWS_AS(ComputeStatistic(g, StatKind::Nodematch("color", 0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(ComputeStatistic(g, StatKind::Nodefactor("shape", 3)),
                  std::invalid_argument);
}

TEST_CASE("quality metrics") {
  const AttributedGraph g = fixture::ShapeGraph();
  const AttributedGraph half = g.WithEdges({{0, 1}, {0, 2}, {3, 4}, {5, 6}});
  const std::vector<std::string> attrs = {"shape"};
  const QualityMetrics q = ComputeQualityMetrics(half, g, attrs);
  CHECK(*q.at("edges") == doctest::Approx(-50.0));
  // Concurrent nodes: A only in `half` against all seven observed.
  CHECK(*q.at("concurrent") == doctest::Approx(100.0 * (1 - 7) / 7.0));
  CHECK(*q.at("homophily_shape") == doctest::Approx(0.0));
  const QualityMetrics z = ComputeQualityMetrics(g, g.WithoutEdges(), attrs);
  CHECK_FALSE(z.at("edges").has_value());
}

TEST_CASE("graph construction rejects bad input") {
  AttributeSchema s{"x", {"a", "b"}};
  CHECK_THROWS(AttributedGraph({s}, {{0, 1, 0}}, {{1, 1}}));
  CHECK_THROWS(AttributedGraph({s}, {{0, 1, 0}}, {{0, 3}}));
  CHECK_THROWS(AttributedGraph({s}, {{0, 2, 0}}, {}));
  const AttributedGraph g({s}, {{0, 1, 0}}, {{2, 0}, {0, 2}, {1, 2}});
  CHECK(g.edge_count() == 2);
  CHECK(g.HasEdge(0, 2));
  CHECK(g.HasEdge(2, 0));
  CHECK_FALSE(g.HasEdge(0, 1));
}

TEST_CASE("csv parsing errors carry file and line") {
  try {
    ParseGraph("node_id,shape\nA,circle\nA,square\n", "u,v\n");
    FAIL("expected a duplicate id error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find(":3") != std::string::npos);
  }
  CHECK_THROWS(ParseGraph("node_id,shape\nA,circle\n", "u,v\nA,Z\n"));
  CHECK_THROWS(ParseGraph("node_id,shape\nA,circle\n", "u,v\nA,A\n"));
  AttributeSchema fixed{"shape", {"circle"}};
  CHECK_THROWS(ParseGraph("node_id,shape\nA,square\n", "u,v\n", {fixed}));
}

TEST_CASE("graph csv round trip") {
  const AttributedGraph g = fixture::ShapeGraph();
  const AttributedGraph back =
      ParseGraph(NodesCsv(g), EdgesCsv(g), {g.schemas().begin(), g.schemas().end()});
  CHECK(back == g);
  const auto dir = std::filesystem::temp_directory_path() / "epidp_graph_test";
  std::filesystem::create_directories(dir);
  WriteGraph(g, dir / "n.csv", dir / "e.csv");
  CHECK(LoadGraph(dir / "n.csv", dir / "e.csv") == g);
  CHECK_THROWS(LoadGraph(dir / "missing.csv", dir / "e.csv"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("crlf and blank lines are accepted") {
  const CsvTable t = ParseCsv("a,b\r\n1,2\r\n\r\n3,4\n", "mem");
  CHECK(t.header == std::vector<std::string>{"a", "b"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[1].line == 4);
  CHECK(t.Column("b") == 1);
  CHECK_THROWS(t.Column("c"));
}

TEST_CASE("double formatting round trips") {
  for (double x : {0.0, 1.0, -2.5, 0.1, 1.0 / 3.0, 1e-300, 12345678.9}) {
    CHECK(ParseDouble(FormatDouble(x)) == x);
  }
  CHECK(FormatDouble(std::nan("")) == "NA");
  CHECK(std::isnan(ParseDouble("NA")));
  CHECK(std::isinf(ParseDouble("inf")));
  CHECK_THROWS(ParseDouble("1.5x"));
}

TEST_CASE("uniform integer draws are unbiased") {
  Rng rng(11);
  std::vector<int> counts(7, 0);
  const int draws = 70000;
  for (int k = 0; k < draws; ++k) ++counts[rng.Below(7)];
  for (int c : counts) CHECK(std::abs(c - 10000) < 5 * std::sqrt(10000.0));
  for (int k = 0; k < 1000; ++k) CHECK(rng.Below(1) == 0);
}

TEST_CASE("uniform doubles stay in range") {
  Rng rng(3);
  for (int k = 0; k < 100000; ++k) {
    const double u = rng.Uniform();
    const double o = rng.UniformOpen();
    CHECK_UNARY(u >= 0.0 && u < 1.0);
    CHECK_UNARY(o > 0.0 && o < 1.0);
  }
}

TEST_CASE("seed derivation is deterministic and collision free") {
  CHECK(DeriveSeed(1, {"dp", 5, 3}) == DeriveSeed(1, {"dp", 5, 3}));
  CHECK(DeriveSeed(1, {"dp", 5, 3}) != DeriveSeed(2, {"dp", 5, 3}));
  CHECK(DeriveSeed(1, {"dp", 5, 3}) != DeriveSeed(1, {"dp", 3, 5}));
  CHECK(DeriveSeed(1, {"a", "b"}) != DeriveSeed(1, {"ab"}));
  CHECK(DeriveSeed(1, {std::int64_t{1}}) != DeriveSeed(1, {"1"}));
  CHECK(FormatSeedPath({"dp", 5, "release"}) == "dp/5/release");

  std::unordered_set<std::uint64_t> seen;
  seen.reserve(2'000'000);
  std::size_t collisions = 0;
  for (std::int64_t i = 0; i < 1000; ++i) {
    for (std::int64_t j = 0; j < 1000; ++j) {
      collisions += !seen.insert(DeriveSeed(42, {"run", i, j})).second;
    }
  }
  CHECK(collisions == 0);
}
