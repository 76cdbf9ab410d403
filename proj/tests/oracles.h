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

// Brute-force reference implementations used by the tests. Nothing here calls
// into the library except to build inputs.

#ifndef EPIDP_TESTS_ORACLES_H_
#define EPIDP_TESTS_ORACLES_H_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "epidp/graph.h"

namespace oracle {

using Pairs = std::vector<std::pair<int, int>>;

// Plain edge list plus one label vector; every statistic is recomputed by
// scanning all edges.
struct Plain {
  int n = 0;
  std::vector<int> label;
  Pairs edges;

  std::vector<int> Degrees() const {
    std::vector<int> d(n, 0);
    for (auto [a, b] : edges) ++d[a], ++d[b];
    return d;
  }
  long MinDegree(int k) const {
    long c = 0;
    for (int x : Degrees()) c += x >= k;
    return c;
  }
  long Mixing(int i, int j) const {
    long c = 0;
    for (auto [a, b] : edges) {
      int la = label[a], lb = label[b];
      if ((la == i && lb == j) || (la == j && lb == i)) ++c;
    }
    return c;
  }
  long Nodematch(int i) const {
    long c = 0;
    for (auto [a, b] : edges) c += label[a] == i && label[b] == i;
    return c;
  }
  long TotalNodematch() const {
    long c = 0;
    for (auto [a, b] : edges) c += label[a] == label[b];
    return c;
  }
  long Nodefactor(int i) const {
    long c = 0;
    for (auto [a, b] : edges) c += label[a] == i || label[b] == i;
    return c;
  }
};

inline epidp::AttributedGraph ToGraph(const Plain& p, int groups,
                                      const std::string& attr = "g") {
  epidp::AttributeSchema s{attr, {}};
  for (int i = 0; i < groups; ++i) s.categories.push_back("c" + std::to_string(i));
  std::vector<epidp::Edge> e;
  for (auto [a, b] : p.edges) {
    e.emplace_back(static_cast<epidp::NodeId>(a), static_cast<epidp::NodeId>(b));
  }
  return epidp::AttributedGraph({s}, {p.label}, e);
}

// G(n, p) with uniform labels, driven by std::minstd_rand so it shares no code
// with the library's generator.
inline Plain RandomPlain(int n, double p, int groups, std::uint32_t seed) {
  std::minstd_rand gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> lab(0, groups - 1);
  Plain g;
  g.n = n;
  for (int v = 0; v < n; ++v) g.label.push_back(lab(gen));
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (u(gen) < p) g.edges.emplace_back(a, b);
    }
  }
  return g;
}

// Exact Boltzmann distribution over all graphs on `n` labelled nodes, indexed
// by the bitmask of present dyads in (0,1),(0,2),...,(n-2,n-1) order.
template <typename Stats>
std::vector<double> Boltzmann(int n, const std::vector<double>& theta,
                              Stats stats) {
  Pairs dyads;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) dyads.emplace_back(a, b);
  }
  const std::size_t states = std::size_t{1} << dyads.size();
  std::vector<double> w(states);
  double z = 0;
  for (std::size_t mask = 0; mask < states; ++mask) {
    Pairs e;
    for (std::size_t k = 0; k < dyads.size(); ++k) {
      if (mask >> k & 1) e.push_back(dyads[k]);
    }
    const std::vector<double> f = stats(e);
    double dot = 0;
    for (std::size_t t = 0; t < theta.size(); ++t) dot += theta[t] * f[t];
    w[mask] = std::exp(dot);
    z += w[mask];
  }
  for (double& x : w) x /= z;
  return w;
}

// Three-node path a-b-c under discrete SIS: from the states at the start of a
// step every infected node recovers with p_recov, every susceptible node is
// infected with 1-(1-p_inf)^k for k infected neighbours, all independently.
// Returns the expected prevalence after `steps` transitions from `start`.
inline double PathSisPrevalence(double p_inf, double p_recov, int start,
                                int steps) {
  const int nbr[3][2] = {{1, -1}, {0, 2}, {1, -1}};
  std::array<double, 8> dist{};
  dist[start] = 1.0;
  for (int s = 0; s < steps; ++s) {
    std::array<double, 8> next{};
    for (int from = 0; from < 8; ++from) {
      if (dist[from] == 0) continue;
      std::array<double, 3> p_on{};
      for (int v = 0; v < 3; ++v) {
        if (from >> v & 1) {
          p_on[v] = 1.0 - p_recov;
        } else {
          int k = 0;
          for (int w : nbr[v]) k += w >= 0 && (from >> w & 1);
          p_on[v] = 1.0 - std::pow(1.0 - p_inf, k);
        }
      }
      for (int to = 0; to < 8; ++to) {
        double p = dist[from];
        for (int v = 0; v < 3; ++v) p *= (to >> v & 1) ? p_on[v] : 1 - p_on[v];
        next[to] += p;
      }
    }
    dist = next;
  }
  double prev = 0;
  for (int st = 0; st < 8; ++st) {
    prev += dist[st] * (((st & 1) + (st >> 1 & 1) + (st >> 2 & 1)) / 3.0);
  }
  return prev;
}

// Nested sums of squares from the textbook correction-term formulas.
struct NestedSs {
  double release, network, error, total;
};
inline NestedSs NestedAnova(const std::vector<double>& y, int r, int n, int m) {
  double grand = 0, raw = 0;
  for (double v : y) grand += v, raw += v * v;
  const double c = grand * grand / (r * n * m);
  double sr = 0, sn = 0;
  for (int i = 0; i < r; ++i) {
    double ti = 0;
    for (int j = 0; j < n; ++j) {
      double tij = 0;
      for (int k = 0; k < m; ++k) tij += y[(i * n + j) * m + k];
      sn += tij * tij / m;
      ti += tij;
    }
    sr += ti * ti / (n * m);
  }
  return {sr - c, sn - sr, raw - sn, raw - c};
}

// Greedy projection written from scratch: lexicographic edge scan, keep an
// edge while both endpoints are below the cap.
inline Pairs Project(int n, Pairs edges, int cap) {
  std::sort(edges.begin(), edges.end());
  std::vector<int> kept(n, 0);
  Pairs out;
  for (auto [a, b] : edges) {
    if (kept[a] < cap && kept[b] < cap) {
      ++kept[a], ++kept[b];
      out.emplace_back(a, b);
    }
  }
  return out;
}

}  // namespace oracle

#endif  // EPIDP_TESTS_ORACLES_H_
