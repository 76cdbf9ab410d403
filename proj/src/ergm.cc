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

#include "epidp/ergm.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include <Eigen/Dense>

#include "epidp/csv.h"

namespace epidp {
namespace {

double DyadCount(std::size_t n) {
  const double nd = static_cast<double>(n);
  return nd * (nd - 1) / 2;
}

double Clamp(double x, double cap) { return std::clamp(x, -cap, cap); }

}  // namespace

void ErgmSpec::Validate() const {
  std::set<StatKind> seen(terms.begin(), terms.end());
  if (seen.size() != terms.size()) {
    throw std::invalid_argument("ERGM spec lists a term twice");
  }
  if (!seen.contains(StatKind::Edges())) {
    throw std::invalid_argument("ERGM spec must include the edges term");
  }
}

void ErgmSpec::Validate(std::span<const AttributeSchema> schemas) const {
  Validate();
  for (const StatKind& t : terms) {
    if (t.type == StatType::kEdges || t.type == StatType::kMinDegree) continue;
    auto it = std::find_if(schemas.begin(), schemas.end(),
                           [&](const auto& s) { return s.name == t.attr; });
    if (it == schemas.end()) {
      throw std::invalid_argument("ERGM term " + t.Descriptor() +
                                  " names an unknown attribute");
    }
    const int k = static_cast<int>(it->size());
    const bool grouped = t.type != StatType::kTotalNodematch;
    if ((grouped && (t.i < 0 || t.i >= k)) ||
        (t.type == StatType::kMixing && (t.j < 0 || t.j >= k))) {
      throw std::invalid_argument("ERGM term " + t.Descriptor() +
                                  " has a group out of range");
    }
  }
}

ErgmSpec MakeErgmSpec(std::span<const AttributeSchema> schemas,
                      const ErgmTermOptions& options) {
  auto find = [&](const std::string& name) -> const AttributeSchema& {
    for (const auto& s : schemas) {
      if (s.name == name) return s;
    }
    throw std::invalid_argument("unknown attribute '" + name + "'");
  };
  ErgmSpec spec;
  spec.terms.push_back(StatKind::Edges());
  for (int d : options.min_degrees) spec.terms.push_back(StatKind::MinDegree(d));
  if (!options.nodematch_attr.empty()) {
    const auto& s = find(options.nodematch_attr);
    for (int i = 0; i < static_cast<int>(s.size()); ++i) {
      spec.terms.push_back(StatKind::Nodematch(s.name, i));
    }
  }
  if (!options.total_nodematch_attr.empty()) {
    spec.terms.push_back(
        StatKind::TotalNodematch(find(options.total_nodematch_attr).name));
  }
  for (const auto& name : options.nodefactor_attrs) {
    const auto& s = find(name);
    for (int i = options.drop_reference_group ? 1 : 0;
         i < static_cast<int>(s.size()); ++i) {
      spec.terms.push_back(StatKind::Nodefactor(s.name, i));
    }
  }
  spec.Validate(schemas);
  return spec;
}

McmcConfig McmcConfig::ForNodes(std::size_t n) {
  const auto dyads = static_cast<std::int64_t>(std::max(1.0, DyadCount(n)));
  return {10 * dyads, dyads, dyads};
}

void McmcConfig::Validate() const {
  if (burn_in < 0 || thinning <= 0 || chain_length < 0) {
    throw std::invalid_argument("MCMC burn-in/chain length must be >= 0 and "
                                "thinning > 0");
  }
}

void FitConfig::Validate() const {
  if (!(initial_gain > 0) || !(gain_decay > 0) || scaling_samples < 2 ||
      subphases < 0 || subphase_iterations < 0 || interval < 0 ||
      check_samples < 2 || !(tolerance > 0) || max_iterations < 1 ||
      !(theta_cap > 0) || !(max_newton_step > 0) ||
      !(newton_damping > 0 && newton_damping <= 1) || !(newton_ridge >= 0) || subphases > 20) {
    throw std::invalid_argument("invalid ERGM fit configuration");
  }
}

ErgmChain::ErgmChain(const AttributedGraph& start, const ErgmSpec& spec,
                     std::vector<double> theta)
    : population_(&start), theta_(std::move(theta)) {
  spec.Validate(start.schemas());
  if (theta_.size() != spec.terms.size()) {
    throw std::invalid_argument("theta length does not match ERGM terms");
  }
  if (start.node_count() < 2) {
    throw std::invalid_argument("ERGM chain needs at least two nodes");
  }
  for (const StatKind& t : spec.terms) {
    const int* labels =
        t.attr.empty() ? nullptr
                       : start.labels(start.AttributeIndex(t.attr)).data();
    terms_.push_back({t.type, labels, t.i, t.j});
  }
  stats_ = ErgmStatistics(start, spec);
  change_.assign(terms_.size(), 0.0);
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    if (terms_[k].type == StatType::kMinDegree) degree_terms_.push_back(k);
  }
  std::map<std::vector<int>, int> classes;
  node_class_.resize(start.node_count());
  for (NodeId v = 0; v < start.node_count(); ++v) {
    std::vector<int> key;
    for (std::size_t a = 0; a < start.schemas().size(); ++a) {
      key.push_back(start.labels(a)[v]);
    }
    auto [it, inserted] =
        classes.emplace(std::move(key), static_cast<int>(classes.size()));
    if (inserted) class_example_.push_back(v);
    node_class_[v] = it->second;
  }
  RebuildClassTable();
  adjacency_.resize(start.node_count());
  for (NodeId v = 0; v < start.node_count(); ++v) {
    const auto nbrs = start.neighbors(v);
    adjacency_[v].assign(nbrs.begin(), nbrs.end());
  }
  edge_count_ = start.edge_count();
}

void ErgmChain::set_theta(std::vector<double> theta) {
  if (theta.size() != terms_.size()) {
    throw std::invalid_argument("theta length does not match ERGM terms");
  }
  theta_ = std::move(theta);
  RebuildClassTable();
}

void ErgmChain::RebuildClassTable() {
  const std::size_t c = class_example_.size();
  class_dot_.assign(c * c, 0.0);
  for (std::size_t a = 0; a < c; ++a) {
    for (std::size_t b = 0; b < c; ++b) {
      // Degrees far above every threshold zero out the degree terms.
      const std::size_t far = std::numeric_limits<std::size_t>::max();
      AddChange(class_example_[a], class_example_[b], far, far, change_.data());
      double dot = 0;
      for (std::size_t k = 0; k < terms_.size(); ++k) dot += theta_[k] * change_[k];
      class_dot_[a * c + b] = dot;
    }
  }
}

bool ErgmChain::HasEdge(NodeId u, NodeId v) const {
  const auto& a = adjacency_[u].size() <= adjacency_[v].size() ? adjacency_[u]
                                                                : adjacency_[v];
  const NodeId other = &a == &adjacency_[u] ? v : u;
  return std::find(a.begin(), a.end(), other) != a.end();
}

void ErgmChain::AddChange(NodeId u, NodeId v, std::size_t deg_u,
                          std::size_t deg_v, double* out) const {
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    const Term& t = terms_[k];
    switch (t.type) {
      case StatType::kEdges:
        out[k] = 1.0;
        break;
      case StatType::kMinDegree: {
        const auto below = static_cast<std::size_t>(t.i - 1);
        out[k] = static_cast<double>(deg_u == below) +
                 static_cast<double>(deg_v == below);
        break;
      }
      case StatType::kMixing: {
        const int a = t.labels[u];
        const int b = t.labels[v];
        out[k] = (a == t.i && b == t.j) || (a == t.j && b == t.i) ? 1.0 : 0.0;
        break;
      }
      case StatType::kNodematch:
        out[k] = t.labels[u] == t.i && t.labels[v] == t.i ? 1.0 : 0.0;
        break;
      case StatType::kTotalNodematch:
        out[k] = t.labels[u] == t.labels[v] ? 1.0 : 0.0;
        break;
      case StatType::kNodefactor:
        out[k] = t.labels[u] == t.i || t.labels[v] == t.i ? 1.0 : 0.0;
        break;
    }
  }
}

void ErgmChain::Toggle(NodeId u, NodeId v, bool present) {
  if (present) {
    auto drop = [](std::vector<NodeId>& list, NodeId x) {
      auto it = std::find(list.begin(), list.end(), x);
      *it = list.back();
      list.pop_back();
    };
    drop(adjacency_[u], v);
    drop(adjacency_[v], u);
    --edge_count_;
  } else {
    adjacency_[u].push_back(v);
    adjacency_[v].push_back(u);
    ++edge_count_;
  }
}

std::int64_t ErgmChain::Run(std::int64_t proposals, Rng& rng) {
  const auto n = static_cast<std::uint64_t>(adjacency_.size());
  const std::size_t d = terms_.size();
  const std::size_t classes = class_example_.size();
  std::int64_t accepted = 0;
  for (std::int64_t p = 0; p < proposals; ++p) {
    const auto u = static_cast<NodeId>(rng.Below(n));
    auto v = static_cast<NodeId>(rng.Below(n - 1));
    if (v >= u) ++v;
    const bool present = HasEdge(u, v);
    const std::size_t deg_u = adjacency_[u].size() - (present ? 1 : 0);
    const std::size_t deg_v = adjacency_[v].size() - (present ? 1 : 0);
    double dot = class_dot_[node_class_[u] * classes + node_class_[v]];
    for (std::size_t k : degree_terms_) {
      const auto below = static_cast<std::size_t>(terms_[k].i - 1);
      dot += theta_[k] * (static_cast<double>(deg_u == below) +
                          static_cast<double>(deg_v == below));
    }
    const double log_ratio = present ? -dot : dot;
    if (log_ratio >= 0 || rng.Uniform() < std::exp(log_ratio)) {
      AddChange(u, v, deg_u, deg_v, change_.data());
      Toggle(u, v, present);
      const double sign = present ? -1.0 : 1.0;
      for (std::size_t k = 0; k < d; ++k) stats_[k] += sign * change_[k];
      ++accepted;
    }
  }
  return accepted;
}

AttributedGraph ErgmChain::ToGraph() const {
  std::vector<Edge> edges;
  edges.reserve(edge_count_);
  for (NodeId u = 0; u < adjacency_.size(); ++u) {
    for (NodeId v : adjacency_[u]) {
      if (u < v) edges.emplace_back(u, v);
    }
  }
  return population_->WithEdges(std::move(edges));
}

std::vector<double> ErgmStatistics(const AttributedGraph& g,
                                   const ErgmSpec& spec) {
  const auto exact = ComputeStatistics(g, spec.terms);
  return {exact.begin(), exact.end()};
}

std::vector<double> ErgmChangeStatistics(const AttributedGraph& g,
                                         const ErgmSpec& spec, NodeId u,
                                         NodeId v) {
  if (u == v) throw std::invalid_argument("change statistic needs u != v");
  if (u >= g.node_count() || v >= g.node_count()) {
    throw std::invalid_argument("dyad endpoint out of range");
  }
  spec.Validate(g.schemas());
  const bool present = g.HasEdge(u, v);
  const std::size_t deg_u = g.degree(u) - (present ? 1 : 0);
  const std::size_t deg_v = g.degree(v) - (present ? 1 : 0);
  std::vector<double> out(spec.terms.size(), 0.0);
  for (std::size_t k = 0; k < spec.terms.size(); ++k) {
    const StatKind& t = spec.terms[k];
    if (t.type == StatType::kEdges) {
      out[k] = 1;
      continue;
    }
    if (t.type == StatType::kMinDegree) {
      const auto below = static_cast<std::size_t>(t.i - 1);
      out[k] = (deg_u == below) + (deg_v == below);
      continue;
    }
    const auto labels = g.labels(g.AttributeIndex(t.attr));
    const int a = labels[u];
    const int b = labels[v];
    switch (t.type) {
      case StatType::kMixing:
        out[k] = (a == t.i && b == t.j) || (a == t.j && b == t.i);
        break;
      case StatType::kNodematch:
        out[k] = a == t.i && b == t.i;
        break;
      case StatType::kTotalNodematch:
        out[k] = a == b;
        break;
      case StatType::kNodefactor:
        out[k] = a == t.i || b == t.i;
        break;
      default:
        break;
    }
  }
  return out;
}

AttributedGraph SampleErgm(const ErgmParams& params, const ErgmSpec& spec,
                           const AttributedGraph& population,
                           const McmcConfig& mcmc, Rng& rng) {
  mcmc.Validate();
  const AttributedGraph empty = population.WithoutEdges();
  ErgmChain chain(empty, spec, params.theta);
  chain.Run(mcmc.burn_in + mcmc.chain_length, rng);
  return chain.ToGraph();
}

std::vector<AttributedGraph> SampleErgmNetworks(
    const ErgmParams& params, const ErgmSpec& spec,
    const AttributedGraph& population, const McmcConfig& mcmc, int count,
    Rng& rng) {
  mcmc.Validate();
  const AttributedGraph empty = population.WithoutEdges();
  ErgmChain chain(empty, spec, params.theta);
  chain.Run(mcmc.burn_in, rng);
  std::vector<AttributedGraph> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int k = 0; k < count; ++k) {
    chain.Run(mcmc.thinning, rng);
    out.push_back(chain.ToGraph());
  }
  return out;
}

std::vector<double> ErgmUpperBounds(const ErgmSpec& spec,
                                    const AttributedGraph& population) {
  const std::size_t n = population.node_count();
  const double dyads = DyadCount(n);
  auto pairs = [](double a) { return a * (a - 1) / 2; };
  std::vector<double> bounds;
  for (const StatKind& t : spec.terms) {
    switch (t.type) {
      case StatType::kEdges:
        bounds.push_back(dyads);
        break;
      case StatType::kMinDegree:
        bounds.push_back(static_cast<std::size_t>(t.i) < n
                             ? static_cast<double>(n)
                             : 0.0);
        break;
      default: {
        const auto sizes = population.GroupSizes(population.AttributeIndex(t.attr));
        const double ni = t.type == StatType::kTotalNodematch
                              ? 0.0
                              : static_cast<double>(sizes.at(t.i));
        if (t.type == StatType::kMixing) {
          const double nj = static_cast<double>(sizes.at(t.j));
          bounds.push_back(t.i == t.j ? pairs(ni) : ni * nj);
        } else if (t.type == StatType::kNodematch) {
          bounds.push_back(pairs(ni));
        } else if (t.type == StatType::kTotalNodematch) {
          double total = 0;
          for (auto s : sizes) total += pairs(static_cast<double>(s));
          bounds.push_back(total);
        } else {
          bounds.push_back(dyads - pairs(static_cast<double>(n) - ni));
        }
      }
    }
  }
  return bounds;
}

SampleMoments ComputeSampleMoments(
    const std::vector<std::vector<double>>& samples) {
  if (samples.size() < 2) {
    throw std::invalid_argument("sample moments need at least two draws");
  }
  const std::size_t k = samples.size();
  const std::size_t d = samples.front().size();
  SampleMoments m;
  m.mean.assign(d, 0.0);
  for (const auto& s : samples) {
    for (std::size_t a = 0; a < d; ++a) m.mean[a] += s[a];
  }
  for (double& x : m.mean) x /= static_cast<double>(k);
  m.covariance.assign(d, std::vector<double>(d, 0.0));
  for (const auto& s : samples) {
    for (std::size_t a = 0; a < d; ++a) {
      const double da = s[a] - m.mean[a];
      for (std::size_t b = a; b < d; ++b) {
        m.covariance[a][b] += da * (s[b] - m.mean[b]);
      }
    }
  }
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = a; b < d; ++b) {
      m.covariance[a][b] /= static_cast<double>(k - 1);
      m.covariance[b][a] = m.covariance[a][b];
    }
  }
  m.standard_error.assign(d, 0.0);
  for (std::size_t a = 0; a < d; ++a) {
    const double var = m.covariance[a][a];
    if (var <= 0) continue;
    double lag = 0;
    for (std::size_t t = 1; t < k; ++t) {
      lag += (samples[t][a] - m.mean[a]) * (samples[t - 1][a] - m.mean[a]);
    }
    const double rho = std::clamp(lag / (static_cast<double>(k - 1) * var), 0.0, 0.99);
    const double effective = static_cast<double>(k) * (1 - rho) / (1 + rho);
    m.standard_error[a] = std::sqrt(var / effective);
  }
  return m;
}

std::vector<std::vector<double>> SimulateErgmStatistics(
    const ErgmParams& params, const ErgmSpec& spec, const AttributedGraph& start,
    std::int64_t burn_in, std::int64_t interval, int count, Rng& rng) {
  ErgmChain chain(start, spec, params.theta);
  chain.Run(burn_in, rng);
  std::vector<std::vector<double>> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int s = 0; s < count; ++s) {
    chain.Run(interval, rng);
    out.emplace_back(chain.statistics().begin(), chain.statistics().end());
  }
  return out;
}

namespace {

// Residuals in standard-error units. A coordinate with no simulated variance
// counts as matched only when its mean equals the target.
std::vector<double> Residuals(const SampleMoments& m,
                              std::span<const double> targets) {
  std::vector<double> z(targets.size());
  for (std::size_t a = 0; a < targets.size(); ++a) {
    const double diff = m.mean[a] - targets[a];
    if (m.standard_error[a] > 0) {
      z[a] = diff / m.standard_error[a];
    } else {
      z[a] = std::abs(diff) < 1e-9 ? 0.0
                                   : std::copysign(INFINITY, diff);
    }
  }
  return z;
}

void CheckTargetConsistency(const ErgmSpec& spec, std::span<const double> t,
                            ErgmFitDiagnostics& diag) {
  double edges = -1;
  for (std::size_t a = 0; a < spec.terms.size(); ++a) {
    if (spec.terms[a].type == StatType::kEdges) edges = t[a];
  }
  for (std::size_t a = 0; a < spec.terms.size(); ++a) {
    const StatKind& k = spec.terms[a];
    const bool edge_based = k.type == StatType::kMixing ||
                            k.type == StatType::kNodematch ||
                            k.type == StatType::kTotalNodematch ||
                            k.type == StatType::kNodefactor;
    if (edge_based && t[a] > edges) {
      diag.infeasible = true;
      diag.warnings.push_back(k.Descriptor() + " target " + FormatDouble(t[a]) +
                              " exceeds edges target " + FormatDouble(edges));
    }
    if (k.type == StatType::kNodematch) {
      for (std::size_t b = 0; b < spec.terms.size(); ++b) {
        const StatKind& o = spec.terms[b];
        if (o.type == StatType::kNodefactor && o.attr == k.attr && o.i == k.i &&
            t[a] > t[b]) {
          diag.infeasible = true;
          diag.warnings.push_back(k.Descriptor() + " target " +
                                  FormatDouble(t[a]) + " exceeds " +
                                  o.Descriptor() + " target " +
                                  FormatDouble(t[b]));
        }
      }
    }
    if (k.type == StatType::kMinDegree && t[a] * k.i > 2 * edges) {
      diag.infeasible = true;
      diag.warnings.push_back(k.Descriptor() + " target " + FormatDouble(t[a]) +
                              " needs more than the edges target allows");
    }
  }
}

}  // namespace

ErgmFit FitErgm(std::span<const double> targets, const ErgmSpec& spec,
                const AttributedGraph& population, const FitConfig& fit,
                const McmcConfig& mcmc, Rng& rng) {
  fit.Validate();
  mcmc.Validate();
  spec.Validate(population.schemas());
  const std::size_t d = spec.terms.size();
  if (targets.size() != d) {
    throw std::invalid_argument("target count does not match ERGM terms");
  }

  ErgmFit result;
  ErgmFitDiagnostics& diag = result.diagnostics;
  diag.requested_targets.assign(targets.begin(), targets.end());
  const std::vector<double> upper = ErgmUpperBounds(spec, population);
  diag.targets.resize(d);
  diag.clamped.assign(d, false);
  for (std::size_t a = 0; a < d; ++a) {
    const double t = std::isfinite(targets[a]) ? targets[a] : 0.0;
    diag.targets[a] = std::clamp(t, 0.0, upper[a]);
    if (diag.targets[a] != targets[a]) {
      diag.clamped[a] = true;
      diag.warnings.push_back(spec.terms[a].Descriptor() + " target " +
                              FormatDouble(targets[a]) + " clamped to " +
                              FormatDouble(diag.targets[a]));
    }
  }
  CheckTargetConsistency(spec, diag.targets, diag);
  const std::vector<double>& target = diag.targets;

  const double dyads = DyadCount(population.node_count());
  const std::int64_t interval =
      fit.interval > 0 ? fit.interval
                       : std::max<std::int64_t>(1, static_cast<std::int64_t>(dyads / 4));

  // Start from the Bernoulli graph with the target density.
  std::vector<double> theta(d, 0.0);
  for (std::size_t a = 0; a < d; ++a) {
    if (spec.terms[a].type == StatType::kEdges) {
      const double rho = std::clamp(target[a] / dyads, 1e-9, 1 - 1e-9);
      theta[a] = Clamp(std::log(rho / (1 - rho)), fit.theta_cap);
    }
  }
  // A target on the boundary of its range is matched only in the limit
  // theta -> -inf (or +inf); pin those coordinates at the cap.
  std::vector<bool> pinned(d, false);
  for (std::size_t a = 0; a < d; ++a) {
    if (target[a] <= 0 || target[a] >= upper[a]) {
      pinned[a] = true;
      theta[a] = target[a] <= 0 ? -fit.theta_cap : fit.theta_cap;
    }
  }

  const AttributedGraph empty = population.WithoutEdges();
  ErgmChain chain(empty, spec, theta);
  chain.Run(mcmc.burn_in, rng);

  auto draw = [&](int count) {
    std::vector<std::vector<double>> samples;
    samples.reserve(count);
    for (int s = 0; s < count; ++s) {
      chain.Run(interval, rng);
      samples.emplace_back(chain.statistics().begin(), chain.statistics().end());
    }
    return samples;
  };

  auto newton_step = [&](const SampleMoments& m, double damping) {
    std::vector<std::size_t> active;
    for (std::size_t a = 0; a < d; ++a) {
      if (pinned[a]) continue;
      if (m.covariance[a][a] > 1e-12) {
        active.push_back(a);
      } else if (std::abs(m.mean[a] - target[a]) > 1e-9) {
        // Statistic frozen at this theta; push toward the target.
        theta[a] = Clamp(theta[a] + (m.mean[a] < target[a] ? 1.0 : -1.0) *
                                        fit.max_newton_step,
                         fit.theta_cap);
      }
    }
    if (active.empty()) return;
    const auto na = static_cast<Eigen::Index>(active.size());
    Eigen::MatrixXd cov(na, na);
    Eigen::VectorXd gap(na);
    double trace = 0;
    for (Eigen::Index r = 0; r < na; ++r) {
      gap(r) = m.mean[active[r]] - target[active[r]];
      for (Eigen::Index c = 0; c < na; ++c) {
        cov(r, c) = m.covariance[active[r]][active[c]];
      }
      trace += cov(r, r);
    }
    // Relative ridge: damps moves along near-singular directions, which
    // appear when targets sit close to the edge of the attainable region.
    cov.diagonal() = cov.diagonal() * (1.0 + fit.newton_ridge) +
                     Eigen::VectorXd::Constant(na, 1e-8 * trace / na);
    Eigen::VectorXd step = cov.ldlt().solve(gap);
    if (!step.allFinite()) {
      step = gap.array() / cov.diagonal().array();
    }
    step *= damping;
    const double largest = step.cwiseAbs().maxCoeff();
    if (largest > fit.max_newton_step) step *= fit.max_newton_step / largest;
    for (Eigen::Index r = 0; r < na; ++r) {
      theta[active[r]] = Clamp(theta[active[r]] - step(r), fit.theta_cap);
    }
    ++diag.newton_steps;
  };

  // Scaling phase: diagonal of the derivative of E[f] at the start point,
  // followed by one Newton step.
  SampleMoments start = ComputeSampleMoments(draw(fit.scaling_samples));
  std::vector<double> scale(d);
  for (std::size_t a = 0; a < d; ++a) {
    scale[a] = std::max(start.covariance[a][a], 0.25);
  }
  newton_step(start, 1.0);
  chain.set_theta(theta);

  // Robbins-Monro subphases with decaying gain; each subphase ends at the
  // average of its iterates.
  double gain = fit.initial_gain;
  int length = fit.subphase_iterations;
  for (int phase = 0; phase < fit.subphases; ++phase, length *= 2) {
    std::vector<double> sum(d, 0.0);
    for (int it = 0; it < length; ++it) {
      chain.Run(interval, rng);
      const auto f = chain.statistics();
      for (std::size_t a = 0; a < d; ++a) {
        if (!pinned[a]) {
          theta[a] = Clamp(theta[a] - gain * (f[a] - target[a]) / scale[a],
                           fit.theta_cap);
        }
        sum[a] += theta[a];
      }
      chain.set_theta(theta);
      ++diag.iterations;
    }
    if (length > 0) {
      for (std::size_t a = 0; a < d; ++a) theta[a] = sum[a] / length;
      chain.set_theta(theta);
    }
    gain *= fit.gain_decay;
  }

  // Convergence checks, refining with damped Newton steps until the
  // simulated mean sits within tolerance of every target. A step that makes
  // the worst residual larger is undone and retried at half the damping.
  const std::int64_t reburn =
      std::max<std::int64_t>(interval * 4, static_cast<std::int64_t>(dyads));
  std::vector<double> best_theta = theta;
  double best_score = INFINITY;
  SampleMoments best_moments;
  double damping = fit.newton_damping;
  for (int check = 0; check < fit.max_iterations; ++check) {
    chain.Run(reburn, rng);
    SampleMoments m = ComputeSampleMoments(draw(fit.check_samples));
    ++diag.checks;
    const std::vector<double> z = Residuals(m, target);
    double score = 0;
    for (double v : z) score = std::max(score, std::abs(v));
    if (check == 0 || score < best_score) {
      best_score = score;
      best_theta = theta;
      best_moments = m;
      diag.simulated_mean = m.mean;
      diag.standard_error = m.standard_error;
      diag.residual_se = z;
    } else {
      damping *= 0.5;
    }
    if (best_score <= fit.tolerance) {
      diag.converged = true;
      break;
    }
    if (check + 1 == fit.max_iterations) break;
    theta = best_theta;
    newton_step(best_moments, damping);
    chain.set_theta(theta);
  }
  theta = best_theta;
  if (!diag.converged) {
    diag.warnings.push_back("no convergence after " +
                            std::to_string(diag.checks) + " checks");
  }
  result.params.theta = theta;
  return result;
}

nlohmann::json ToJson(const ErgmSpec& spec) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : spec.terms) terms.push_back(t.Descriptor());
  return terms;
}

ErgmSpec ErgmSpecFromJson(const nlohmann::json& j) {
  ErgmSpec spec;
  for (const auto& t : j) spec.terms.push_back(StatKind::Parse(t.get<std::string>()));
  spec.Validate();
  return spec;
}

nlohmann::json ErgmModelJson(const ErgmParams& params, const ErgmSpec& spec) {
  nlohmann::json theta = nlohmann::json::array();
  for (double x : params.theta) theta.push_back(x);
  return {{"family", "ergm"}, {"terms", ToJson(spec)}, {"theta", theta}};
}

nlohmann::json ToJson(const ErgmFit& fit, const ErgmSpec& spec) {
  nlohmann::json j = ErgmModelJson(fit.params, spec);
  const auto& d = fit.diagnostics;
  auto numbers = [](const std::vector<double>& xs) {
    nlohmann::json out = nlohmann::json::array();
    for (double x : xs) {
      if (std::isfinite(x)) {
        out.push_back(x);
      } else {
        out.push_back(FormatDouble(x));
      }
    }
    return out;
  };
  nlohmann::json clamped = nlohmann::json::array();
  for (bool c : d.clamped) clamped.push_back(c);
  j["diagnostics"] = {{"converged", d.converged},
                      {"iterations", d.iterations},
                      {"newton_steps", d.newton_steps},
                      {"checks", d.checks},
                      {"requested_targets", numbers(d.requested_targets)},
                      {"targets", numbers(d.targets)},
                      {"clamped", clamped},
                      {"infeasible", d.infeasible},
                      {"warnings", d.warnings},
                      {"simulated_mean", numbers(d.simulated_mean)},
                      {"standard_error", numbers(d.standard_error)},
                      {"residual_se", numbers(d.residual_se)}};
  return j;
}

void ErgmFromJson(const nlohmann::json& j, ErgmSpec& spec, ErgmParams& params) {
  if (j.at("family").get<std::string>() != "ergm") {
    throw std::invalid_argument("not an ERGM model document");
  }
  spec = ErgmSpecFromJson(j.at("terms"));
  params.theta = j.at("theta").get<std::vector<double>>();
  if (params.theta.size() != spec.terms.size()) {
    throw std::invalid_argument("theta length does not match ERGM terms");
  }
}

}  // namespace epidp
