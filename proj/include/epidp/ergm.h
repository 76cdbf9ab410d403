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

#ifndef EPIDP_ERGM_H_
#define EPIDP_ERGM_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "epidp/graph.h"
#include "epidp/random.h"
#include "epidp/statistics.h"
#include "json.hpp"

namespace epidp {

// Ordered list of ERGM sufficient statistics.
struct ErgmSpec {
  std::vector<StatKind> terms;

  // Requires distinct terms including `edges`.
  void Validate() const;
  // Additionally checks that every attribute and group exists in `schemas`.
  void Validate(std::span<const AttributeSchema> schemas) const;
};

// Term selection for the usual spec: edges, degree thresholds, per-group
// nodematch on one attribute, total nodematch on another, and nodefactor on
// a list of attributes.
struct ErgmTermOptions {
  std::vector<int> min_degrees = {2, 4};
  std::string nodematch_attr = "age";
  std::string total_nodematch_attr = "race";
  std::vector<std::string> nodefactor_attrs = {"age", "race"};
  // Leave out the nodefactor term of each attribute's first group; the full
  // set is collinear with `edges`.
  bool drop_reference_group = true;
};

ErgmSpec MakeErgmSpec(std::span<const AttributeSchema> schemas,
                      const ErgmTermOptions& options = {});

struct ErgmParams {
  std::vector<double> theta;
};

struct McmcConfig {
  std::int64_t burn_in = 0;       // proposals before the first draw
  std::int64_t thinning = 0;      // proposals between successive draws
  std::int64_t chain_length = 0;  // proposals after burn-in for SampleErgm

  // 10 * C(n,2) burn-in and C(n,2) thinning and chain length.
  static McmcConfig ForNodes(std::size_t n);
  void Validate() const;
};

// Stochastic-approximation moment matching settings. Zero-valued sizes are
// resolved from the dyad count at fit time.
struct FitConfig {
  double initial_gain = 0.2;
  double gain_decay = 0.5;      // gain multiplier between subphases
  int scaling_samples = 50;     // draws used to estimate the diagonal scaling
  int subphases = 4;
  int subphase_iterations = 40;  // first subphase; each later one doubles
  std::int64_t interval = 0;    // proposals per update; 0 means C(n,2) / 4
  int check_samples = 200;      // draws per convergence check
  double tolerance = 3.0;       // allowed |mean - target| in standard errors
  int max_iterations = 12;      // convergence checks (with Newton steps)
  double theta_cap = 20.0;
  double max_newton_step = 2.0;
  double newton_damping = 0.5;  // fraction of the Newton step taken after a
                                // failed check
  double newton_ridge = 0.1;    // relative diagonal loading of the Newton
                                // system

  void Validate() const;
};

// Incremental Metropolis-Hastings chain over single-dyad toggles targeting
// Pr(G) proportional to exp(theta . f(G)). `start` supplies the node
// attributes and must outlive the chain.
class ErgmChain {
 public:
  ErgmChain(const AttributedGraph& start, const ErgmSpec& spec,
            std::vector<double> theta);

  void set_theta(std::vector<double> theta);
  std::span<const double> theta() const { return theta_; }

  // Runs `proposals` uniform-dyad toggle proposals; returns accepted count.
  std::int64_t Run(std::int64_t proposals, Rng& rng);

  // f(G) of the current state, maintained incrementally.
  std::span<const double> statistics() const { return stats_; }
  std::size_t edge_count() const { return edge_count_; }
  AttributedGraph ToGraph() const;

 private:
  struct Term {
    StatType type;
    const int* labels;  // null for edges and min_degree
    int i;
    int j;
  };

  bool HasEdge(NodeId u, NodeId v) const;
  // Change in f from adding (u,v) to the graph without it.
  void AddChange(NodeId u, NodeId v, std::size_t deg_u, std::size_t deg_v,
                 double* out) const;
  void Toggle(NodeId u, NodeId v, bool present);
  void RebuildClassTable();

  const AttributedGraph* population_;
  std::vector<Term> terms_;
  // Nodes are grouped into classes by their full label tuple; class_dot_
  // holds theta . change for the label-only terms of each class pair.
  std::vector<int> node_class_;
  std::vector<NodeId> class_example_;
  std::vector<double> class_dot_;
  std::vector<std::size_t> degree_terms_;
  std::vector<double> theta_;
  std::vector<double> stats_;
  std::vector<double> change_;
  std::vector<std::vector<NodeId>> adjacency_;
  std::size_t edge_count_ = 0;
};

// f(G) in term order.
std::vector<double> ErgmStatistics(const AttributedGraph& g,
                                   const ErgmSpec& spec);

// f(G + uv) - f(G - uv) without copying the graph. Throws if u == v.
std::vector<double> ErgmChangeStatistics(const AttributedGraph& g,
                                         const ErgmSpec& spec, NodeId u,
                                         NodeId v);

// Chain from the empty graph; the state after burn_in + chain_length
// proposals.
AttributedGraph SampleErgm(const ErgmParams& params, const ErgmSpec& spec,
                           const AttributedGraph& population,
                           const McmcConfig& mcmc, Rng& rng);

// `count` draws from one chain: burn_in proposals, then one draw every
// `thinning` proposals.
std::vector<AttributedGraph> SampleErgmNetworks(
    const ErgmParams& params, const ErgmSpec& spec,
    const AttributedGraph& population, const McmcConfig& mcmc, int count,
    Rng& rng);

// Largest attainable value of each term's statistic for these nodes.
std::vector<double> ErgmUpperBounds(const ErgmSpec& spec,
                                    const AttributedGraph& population);

struct ErgmFitDiagnostics {
  bool converged = false;
  int iterations = 0;             // stochastic-approximation updates
  int newton_steps = 0;
  int checks = 0;
  std::vector<double> requested_targets;
  std::vector<double> targets;    // after clamping to feasible ranges
  std::vector<bool> clamped;
  bool infeasible = false;        // targets mutually inconsistent
  std::vector<std::string> warnings;
  std::vector<double> simulated_mean;
  std::vector<double> standard_error;
  std::vector<double> residual_se;  // (mean - target) / SE
};

struct ErgmFit {
  ErgmParams params;
  ErgmFitDiagnostics diagnostics;
};

// Finds theta whose simulated mean statistics match `targets`. Targets are
// first clamped to [0, upper bound]; inconsistent targets are flagged but
// still fitted.
ErgmFit FitErgm(std::span<const double> targets, const ErgmSpec& spec,
                const AttributedGraph& population, const FitConfig& fit,
                const McmcConfig& mcmc, Rng& rng);

// Mean, covariance and autocorrelation-adjusted standard errors of
// `samples` (one row per draw).
struct SampleMoments {
  std::vector<double> mean;
  std::vector<double> standard_error;
  std::vector<std::vector<double>> covariance;
};
SampleMoments ComputeSampleMoments(
    const std::vector<std::vector<double>>& samples);

// Draws `count` statistic vectors at `theta` from a chain started at
// `start`, after `burn_in` proposals.
std::vector<std::vector<double>> SimulateErgmStatistics(
    const ErgmParams& params, const ErgmSpec& spec, const AttributedGraph& start,
    std::int64_t burn_in, std::int64_t interval, int count, Rng& rng);

nlohmann::json ToJson(const ErgmSpec& spec);
ErgmSpec ErgmSpecFromJson(const nlohmann::json& j);
nlohmann::json ToJson(const ErgmFit& fit, const ErgmSpec& spec);
nlohmann::json ErgmModelJson(const ErgmParams& params, const ErgmSpec& spec);
// Reads the model document written by ToJson / ErgmModelJson.
void ErgmFromJson(const nlohmann::json& j, ErgmSpec& spec, ErgmParams& params);

}  // namespace epidp

#endif  // EPIDP_ERGM_H_
