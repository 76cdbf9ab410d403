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

#include "epidp/ergm.h"
#include "epidp/statistics.h"
#include "fixtures.h"
#include "oracles.h"

using namespace epidp;

namespace {

ErgmSpec FullSpec() {
  ErgmSpec s;
  s.terms = {StatKind::Edges(),           StatKind::MinDegree(1),
             StatKind::MinDegree(3),      StatKind::Nodematch("g", 0),
             StatKind::Nodematch("g", 2), StatKind::TotalNodematch("g"),
             StatKind::Nodefactor("g", 1), StatKind::Mixing("g", 0, 2)};
  return s;
}

std::size_t Mask(const AttributedGraph& g) {
  std::size_t mask = 0;
  int k = 0;
  const auto n = static_cast<NodeId>(g.node_count());
  for (NodeId a = 0; a < n; ++a) {
    for (NodeId b = a + 1; b < n; ++b, ++k) {
      if (g.HasEdge(a, b)) mask |= std::size_t{1} << k;
    }
  }
  return mask;
}

}  // namespace

TEST_CASE("statistics follow term order") {
  const AttributedGraph g = fixture::ShapeGraph();
  ErgmSpec s;
  s.terms = {StatKind::Edges(), StatKind::TotalNodematch("shape"),
             StatKind::MinDegree(3), StatKind::Nodefactor("shape", 1)};
  CHECK(ErgmStatistics(g, s) == std::vector<double>{8, 4, 2, 5});
}

TEST_CASE("change statistics equal recomputed differences") {
  const ErgmSpec spec = FullSpec();
  for (std::uint32_t seed = 1; seed <= 20; ++seed) {
    const AttributedGraph g =
        oracle::ToGraph(oracle::RandomPlain(15, 0.2, 3, seed), 3);
    for (NodeId u = 0; u < 15; ++u) {
      for (NodeId v = u + 1; v < 15; ++v) {
        std::vector<Edge> with, without;
        for (const Edge& e : g.edges()) {
          if (!(e == Edge(u, v))) without.push_back(e);
        }
        with = without;
        with.emplace_back(u, v);
        const auto a = ErgmStatistics(g.WithEdges(with), spec);
        const auto b = ErgmStatistics(g.WithEdges(without), spec);
        const auto d = ErgmChangeStatistics(g, spec, u, v);
        for (std::size_t t = 0; t < d.size(); ++t) CHECK(d[t] == a[t] - b[t]);
      }
    }
  }
  CHECK_THROWS(ErgmChangeStatistics(fixture::ShapeGraph(), spec, 1, 1));
}

TEST_CASE("chain keeps statistics in sync with its graph") {
  const ErgmSpec spec = FullSpec();
  const AttributedGraph start =
      oracle::ToGraph(oracle::RandomPlain(25, 0.1, 3, 3), 3);
  ErgmChain chain(start, spec, {-1.0, 0.3, -0.2, 0.5, 0.1, 0.4, -0.3, 0.2});
  Rng rng(6);
  for (int round = 0; round < 20; ++round) {
    chain.Run(500, rng);
    const AttributedGraph now = chain.ToGraph();
    const auto stats = chain.statistics();
    CHECK(std::vector<double>(stats.begin(), stats.end()) ==
          ErgmStatistics(now, spec));
    CHECK(chain.edge_count() == now.edge_count());
  }
  chain.set_theta({-2, 0, 0, 0, 0, 0, 0, 0});
  CHECK(chain.theta()[0] == -2);
  CHECK_THROWS(chain.set_theta({1.0}));
}

TEST_CASE("sampler matches exact distribution on four nodes") {
  AttributeSchema s{"g", {"a", "b"}};
  const AttributedGraph pop({s}, {{0, 0, 1, 1}}, {});
  ErgmSpec spec;
  spec.terms = {StatKind::Edges(), StatKind::TotalNodematch("g")};
  const std::vector<double> theta = {-0.4, 0.9};
  const std::vector<int> label = {0, 0, 1, 1};
  const auto exact = oracle::Boltzmann(4, theta, [&](const oracle::Pairs& e) {
    double same = 0;
    for (auto [a, b] : e) same += label[a] == label[b];
    return std::vector<double>{static_cast<double>(e.size()), same};
  });

  ErgmChain chain(pop, spec, theta);
  Rng rng(99);
  chain.Run(1000, rng);
  const int draws = 200000;
  std::vector<double> freq(64, 0.0);
  for (int k = 0; k < draws; ++k) {
    chain.Run(6, rng);
    freq[Mask(chain.ToGraph())] += 1.0 / draws;
  }
  double tv = 0;
  for (int m = 0; m < 64; ++m) tv += 0.5 * std::abs(freq[m] - exact[m]);
  CHECK(tv < 0.03);
}

TEST_CASE("upper bounds") {
  const AttributedGraph g = fixture::ShapeGraph();
  ErgmSpec s;
  s.terms = {StatKind::Edges(), StatKind::MinDegree(2),
             StatKind::Nodematch("shape", 0), StatKind::Mixing("shape", 0, 1),
             StatKind::TotalNodematch("shape"), StatKind::Nodefactor("shape", 2)};
  // 21 dyads; 7 nodes; C(3,2); 3*2; 3+1+1; 21 - C(5,2).
  CHECK(ErgmUpperBounds(s, g) == std::vector<double>{21, 7, 3, 6, 5, 11});
}

TEST_CASE("edges-only fit recovers the logit of the density") {
  AttributeSchema s{"g", {"a"}};
  const int n = 80;
  const AttributedGraph pop({s}, {std::vector<int>(n, 0)}, {});
  ErgmSpec spec;
  spec.terms = {StatKind::Edges()};
  const double dyads = n * (n - 1) / 2.0;
  const std::vector<double> target = {0.1 * dyads};
  FitConfig fit;
  Rng rng(12);
  const ErgmFit r = FitErgm(target, spec, pop, fit, McmcConfig::ForNodes(n), rng);
  CHECK(r.diagnostics.converged);
  CHECK(std::abs(r.params.theta[0] - std::log(0.1 / 0.9)) < 0.05);
}

TEST_CASE("fit flags and clamps infeasible targets") {
  AttributeSchema s{"g", {"a", "b"}};
  std::vector<int> lab(30);
  for (int v = 0; v < 30; ++v) lab[v] = v % 2;
  const AttributedGraph pop({s}, {lab}, {});
  ErgmSpec spec;
  spec.terms = {StatKind::Edges(), StatKind::Nodematch("g", 0),
                StatKind::Nodefactor("g", 0)};
  FitConfig fit;
  fit.max_iterations = 2;
  Rng rng(1);
  const std::vector<double> targets = {20, 40, 30};
  const ErgmFit r = FitErgm(targets, spec, pop, fit, McmcConfig::ForNodes(30), rng);
  CHECK(r.diagnostics.infeasible);
  CHECK_FALSE(r.diagnostics.warnings.empty());
  const std::vector<double> negative = {-5, 1, 3};
  const ErgmFit c = FitErgm(negative, spec, pop, fit, McmcConfig::ForNodes(30), rng);
  CHECK(c.diagnostics.clamped[0]);
  CHECK(c.diagnostics.targets[0] == 0.0);
}

TEST_CASE("sample moments") {
  const std::vector<std::vector<double>> x = {{1, 2}, {3, 2}, {5, 2}};
  const SampleMoments m = ComputeSampleMoments(x);
  CHECK(m.mean == std::vector<double>{3, 2});
  CHECK(m.covariance[0][0] == doctest::Approx(4.0));
  CHECK(m.covariance[1][1] == 0.0);
  CHECK(m.standard_error[1] == 0.0);
}

TEST_CASE("spec construction and json") {
  AttributeSchema age{"age", {"y", "m", "o"}};
  AttributeSchema race{"race", {"p", "q"}};
  const std::vector<AttributeSchema> schemas = {age, race};
  const ErgmSpec spec = MakeErgmSpec(schemas);
  // edges, 2 degree terms, 3 nodematch, total nodematch, 2 + 1 nodefactor.
  CHECK(spec.terms.size() == 10);
  CHECK(spec.terms.front() == StatKind::Edges());
  const ErgmSpec back = ErgmSpecFromJson(ToJson(spec));
  CHECK(back.terms == spec.terms);

  ErgmParams params{std::vector<double>(10, 0.5)};
  ErgmSpec s2;
  ErgmParams p2;
  ErgmFromJson(ErgmModelJson(params, spec), s2, p2);
  CHECK(s2.terms == spec.terms);
  CHECK(p2.theta == params.theta);

  ErgmSpec dup;
  dup.terms = {StatKind::Edges(), StatKind::Edges()};
  CHECK_THROWS(dup.Validate());
  ErgmSpec no_edges;
  no_edges.terms = {StatKind::MinDegree(2)};
  CHECK_THROWS(no_edges.Validate());
  ErgmSpec bad_group;
  bad_group.terms = {StatKind::Edges(), StatKind::Nodematch("age", 5)};
  CHECK_THROWS(bad_group.Validate(schemas));
}

TEST_CASE("network draws are reproducible") {
  AttributeSchema s{"g", {"a", "b"}};
  std::vector<int> lab(40);
  for (int v = 0; v < 40; ++v) lab[v] = v % 2;
  const AttributedGraph pop({s}, {lab}, {});
  ErgmSpec spec;
  spec.terms = {StatKind::Edges(), StatKind::TotalNodematch("g")};
  const ErgmParams params{{-3.0, 1.0}};
  const McmcConfig mcmc = McmcConfig::ForNodes(40);
  Rng a(5), b(5);
  const auto ga = SampleErgmNetworks(params, spec, pop, mcmc, 3, a);
  const auto gb = SampleErgmNetworks(params, spec, pop, mcmc, 3, b);
  REQUIRE(ga.size() == 3);
  for (int k = 0; k < 3; ++k) CHECK(ga[k] == gb[k]);
  CHECK_FALSE(ga[0] == ga[1]);
}
