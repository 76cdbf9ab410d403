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
#include <limits>

#include "epidp/dp_release.h"
#include "epidp/statistics.h"
#include "fixtures.h"
#include "oracles.h"

using namespace epidp;

namespace {

std::vector<StatKind> AllKinds(int groups) {
  std::vector<StatKind> k = {StatKind::Edges(), StatKind::MinDegree(1),
                             StatKind::MinDegree(2), StatKind::MinDegree(4),
                             StatKind::TotalNodematch("g")};
  for (int i = 0; i < groups; ++i) {
    k.push_back(StatKind::Nodematch("g", i));
    k.push_back(StatKind::Nodefactor("g", i));
    for (int j = i; j < groups; ++j) k.push_back(StatKind::Mixing("g", i, j));
  }
  return k;
}

}  // namespace

TEST_CASE("sensitivity table") {
  for (int d = 2; d <= 5; ++d) {
    CHECK(GlobalSensitivity(StatKind::Edges(), d) == d);
    CHECK(GlobalSensitivity(StatKind::MinDegree(2), d) == d + 1);
    CHECK(GlobalSensitivity(StatKind::MinDegree(7), d) == d + 1);
    CHECK(GlobalSensitivity(StatKind::Mixing("a", 0, 1), d) == d);
    CHECK(GlobalSensitivity(StatKind::Nodematch("a", 0), d) == d);
    CHECK(GlobalSensitivity(StatKind::TotalNodematch("a"), d) == d);
    CHECK(GlobalSensitivity(StatKind::Nodefactor("a", 1), d) == 2 * d);
  }
}

TEST_CASE("sensitivities bound node-neighbour changes below the cap") {
  // Deleting one node from a graph that already respects the cap never moves
  // a statistic by more than its sensitivity.
  for (std::uint32_t seed = 1; seed <= 200; ++seed) {
    const int cap = 2 + seed % 4;
    oracle::Plain p = oracle::RandomPlain(12, 0.3, 3, seed);
    p.edges = oracle::Project(p.n, p.edges, cap);
    const AttributedGraph g = oracle::ToGraph(p, 3);
    const int drop = static_cast<int>(seed % p.n);
    std::vector<Edge> kept;
    for (auto [a, b] : p.edges) {
      if (a != drop && b != drop) kept.emplace_back(a, b);
    }
    const AttributedGraph h = g.WithEdges(kept);
    for (const StatKind& k : AllKinds(3)) {
      CHECK(std::abs(ComputeStatistic(g, k) - ComputeStatistic(h, k)) <=
            GlobalSensitivity(k, cap));
    }
  }
}

TEST_CASE("degree projection matches the greedy oracle") {
  for (std::uint32_t seed = 1; seed <= 300; ++seed) {
    const int cap = 2 + seed % 4;
    const oracle::Plain p = oracle::RandomPlain(30, 0.15, 2, seed);
    const AttributedGraph g = oracle::ToGraph(p, 2);
    const AttributedGraph t = TruncateDegree(g, cap);
    const oracle::Pairs want = oracle::Project(p.n, p.edges, cap);
    REQUIRE(t.edge_count() == want.size());
    for (std::size_t k = 0; k < want.size(); ++k) {
      CHECK(t.edges()[k] == Edge(want[k].first, want[k].second));
    }
    CHECK(t.max_degree() <= static_cast<std::size_t>(cap));
    CHECK(TruncateDegree(t, cap) == t);
  }
  CHECK_THROWS(TruncateDegree(fixture::ShapeGraph(), 0));
}

TEST_CASE("laplace inverse cdf") {
  CHECK(LaplaceFromUniform(0.5, 2.0) == 0.0);
  CHECK(LaplaceFromUniform(0.25, 2.0) == doctest::Approx(2.0 * std::log(0.5)));
  CHECK(LaplaceFromUniform(0.75, 2.0) == doctest::Approx(-2.0 * std::log(0.5)));
  CHECK_THROWS(LaplaceFromUniform(0.0, 1.0));
  CHECK_THROWS(LaplaceFromUniform(1.0, 1.0));
  Rng rng(1);
  CHECK_THROWS(SampleLaplace(rng, 0.0));
}

TEST_CASE("laplace moments") {
  Rng rng(2024);
  const int n = 200000;
  const double b = 1.5;
  double s1 = 0, s2 = 0, abs_sum = 0;
  for (int k = 0; k < n; ++k) {
    const double x = SampleLaplace(rng, b);
    s1 += x;
    s2 += x * x;
    abs_sum += std::abs(x);
  }
  const double mean = s1 / n;
  const double var = s2 / n - mean * mean;
  CHECK(std::abs(mean) < 4 * std::sqrt(2 * b * b / n));
  CHECK(var == doctest::Approx(2 * b * b).epsilon(0.03));
  CHECK(abs_sum / n == doctest::Approx(b).epsilon(0.02));
}

TEST_CASE("budget allocation equalises noise scales") {
  const std::vector<StatKind> kinds = AllKinds(3);
  const double eps = 2.0;
  const int cap = 4;
  const auto shares = AllocateBudget(kinds, eps, cap);
  double total = 0, gs_sum = 0;
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    total += shares[k];
    gs_sum += GlobalSensitivity(kinds[k], cap);
  }
  CHECK(total == doctest::Approx(eps));
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    CHECK(GlobalSensitivity(kinds[k], cap) / shares[k] ==
          doctest::Approx(gs_sum / eps).epsilon(1e-12));
  }
  CHECK_THROWS(AllocateBudget({}, 1.0, 2));
  CHECK_THROWS(AllocateBudget(kinds, 0.0, 2));
}

TEST_CASE("infinite budget returns exact projected values") {
  const AttributedGraph g = fixture::ShapeGraph();
  ReleaseSpec spec{{StatKind::Edges(), StatKind::Mixing("shape", 1, 2),
                    StatKind::MinDegree(3)},
                   PrivacyBudget::Infinite(),
                   2};
  Rng rng(5);
  const PrivateRelease r = ReleaseStatistics(g, spec, rng);
  const AttributedGraph t = TruncateDegree(g, 2);
  for (const auto& s : r.statistics) {
    CHECK(s.value == static_cast<double>(ComputeStatistic(t, s.kind)));
    CHECK(s.noise_scale == 0.0);
    CHECK(std::isinf(s.epsilon_share));
  }
}

TEST_CASE("noisy releases are clipped and reproducible") {
  const AttributedGraph g = fixture::ShapeGraph();
  ReleaseSpec spec{{StatKind::Edges(), StatKind::Nodematch("shape", 1)},
                   PrivacyBudget::Finite(0.5),
                   3};
  Rng a(9), b(9);
  const PrivateRelease ra = ReleaseStatistics(g, spec, a);
  const PrivateRelease rb = ReleaseStatistics(g, spec, b);
  CHECK(ra.values() == rb.values());
  Rng rng(10);
  for (int k = 0; k < 500; ++k) {
    for (double v : ReleaseStatistics(g, spec, rng).values()) CHECK(v >= 0.0);
  }
  CHECK(ra.statistics[0].noise_scale == doctest::Approx(6.0 / 0.5));
  CHECK(ra.ValueOf(StatKind::Edges()) == ra.statistics[0].value);
  CHECK_THROWS_AS(ra.ValueOf(StatKind::MinDegree(2)), std::out_of_range);
}

TEST_CASE("clipping inflates zero counts") {
  // The released value is max(0, Lap(b)) whose mean is b/2.
  const AttributedGraph g = fixture::ShapeGraph().WithoutEdges();
  ReleaseSpec spec{{StatKind::Edges()}, PrivacyBudget::Finite(1.0), 3};
  Rng rng(77);
  double sum = 0;
  const int n = 20000;
  for (int k = 0; k < n; ++k) sum += ReleaseStatistics(g, spec, rng).values()[0];
  CHECK(sum / n == doctest::Approx(1.5).epsilon(0.05));
}

TEST_CASE("privacy budget parsing") {
  CHECK(PrivacyBudget::Parse("inf").is_infinite());
  CHECK(PrivacyBudget::Parse("2.5").value() == 2.5);
  CHECK(std::isinf(PrivacyBudget::Infinite().AsDouble()));
  CHECK_THROWS(PrivacyBudget::Parse("0"));
  CHECK_THROWS(PrivacyBudget::Parse("-1"));
  CHECK_THROWS(PrivacyBudget::Parse("abc"));
  CHECK_THROWS(PrivacyBudget::Finite(std::numeric_limits<double>::infinity()));
  CHECK_THROWS(PrivacyBudget::Infinite().value());
}

TEST_CASE("release json round trip") {
  const AttributedGraph g = fixture::ShapeGraph();
  ReleaseSpec spec{{StatKind::Edges(), StatKind::Nodefactor("shape", 2)},
                   PrivacyBudget::Finite(1.0),
                   2};
  Rng rng(4);
  PrivateRelease r = ReleaseStatistics(g, spec, rng);
  r.seed_path = "unit/test";
  const PrivateRelease back = ReleaseFromJson(ToJson(r));
  CHECK(back.values() == r.values());
  CHECK(back.kinds() == r.kinds());
  CHECK(back.epsilon == r.epsilon);
  CHECK(back.delta_cap == 2);
  CHECK(back.seed_path == "unit/test");
  CHECK(BudgetFromJson(ToJson(PrivacyBudget::Infinite())).is_infinite());
}

TEST_CASE("exact release skips projection") {
  const AttributedGraph g = fixture::ShapeGraph();
  const std::vector<StatKind> kinds = {StatKind::MinDegree(3)};
  CHECK(ExactRelease(g, kinds).values()[0] == 2.0);
  ReleaseSpec bad{{}, PrivacyBudget::Infinite(), 2};
  CHECK_THROWS(bad.Validate());
}
