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

#include "epidp/epidemic.h"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "epidp/csv.h"

namespace epidp {
namespace {

bool IsProbability(double p) { return p >= 0 && p <= 1; }

RatioResult Ratio(const std::vector<std::string>& groups,
                  const std::vector<double>& num,
                  const std::vector<std::string>& other_groups,
                  const std::vector<double>& den) {
  if (groups != other_groups) {
    throw std::invalid_argument("summaries have different group schemas");
  }
  RatioResult r;
  r.groups = groups;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (den[g] == 0 || std::isnan(den[g]) || std::isnan(num[g])) {
      r.values.push_back(std::nullopt);
      ++r.missing;
    } else {
      r.values.push_back(num[g] / den[g]);
    }
  }
  return r;
}

}  // namespace

std::string_view ScenarioName(Scenario s) {
  return s == Scenario::kBaseline ? "baseline" : "test_and_treat";
}

Scenario ParseScenario(std::string_view name) {
  if (name == "baseline") return Scenario::kBaseline;
  if (name == "test_and_treat") return Scenario::kTestAndTreat;
  throw std::invalid_argument("unknown scenario '" + std::string(name) + "'");
}

std::vector<std::string> SimConfig::Validate() const {
  if (!IsProbability(p_inf) || !IsProbability(p_recov) ||
      !IsProbability(initial_prevalence)) {
    throw std::invalid_argument("simulation probabilities must lie in [0, 1]");
  }
  if (burn_in < 0 || analytic_window < 0) {
    throw std::invalid_argument("burn-in and analytic window must be >= 0");
  }
  std::vector<std::string> warnings;
  if (scenario == Scenario::kTestAndTreat) {
    if (!IsProbability(intervention.test_rate) ||
        !IsProbability(intervention.p_recov_treated)) {
      throw std::invalid_argument("intervention probabilities must lie in [0, 1]");
    }
    if (intervention.test_duration < 1) {
      throw std::invalid_argument("test duration must be >= 1");
    }
    if (intervention.p_recov_treated < p_recov) {
      warnings.push_back("treated recovery rate below the untreated rate");
    }
  }
  return warnings;
}

std::vector<std::string> EpidemicGroups(const AttributedGraph& g) {
  std::vector<std::string> groups = {"ALL"};
  for (const auto& s : g.schemas()) {
    for (const auto& c : s.categories) groups.push_back(s.name + ":" + c);
  }
  return groups;
}

EpidemicTrajectory RunSis(const AttributedGraph& g, const SimConfig& cfg,
                          Rng& rng) {
  cfg.Validate();
  const std::size_t n = g.node_count();
  const auto seeds = static_cast<std::size_t>(
      std::floor(cfg.initial_prevalence * static_cast<double>(n)));
  if (seeds < 1) {
    throw std::invalid_argument(
        "initial prevalence leaves no index case on this network");
  }
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  for (std::size_t k = 0; k < seeds; ++k) {
    const std::size_t pick = k + rng.Below(n - k);
    std::swap(order[k], order[pick]);
  }
  order.resize(seeds);
  return RunSis(g, cfg, rng, order);
}

EpidemicTrajectory RunSis(const AttributedGraph& g, const SimConfig& cfg,
                          Rng& rng, std::span<const NodeId> initial_infected) {
  cfg.Validate();
  const std::size_t n = g.node_count();
  const bool intervene = cfg.scenario == Scenario::kTestAndTreat;

  // group_of[a][v]: series index of node v for attribute a.
  EpidemicTrajectory traj;
  traj.groups = EpidemicGroups(g);
  const std::size_t group_count = traj.groups.size();
  std::vector<std::vector<std::size_t>> group_of(g.schemas().size());
  std::vector<std::int64_t> group_size(group_count, 0);
  group_size[0] = static_cast<std::int64_t>(n);
  std::vector<std::size_t> attr_offset = {1};
  {
    std::size_t offset = 1;
    for (std::size_t a = 0; a < g.schemas().size(); ++a) {
      const auto labels = g.labels(a);
      group_of[a].resize(n);
      for (NodeId v = 0; v < n; ++v) {
        group_of[a][v] = offset + static_cast<std::size_t>(labels[v]);
        ++group_size[group_of[a][v]];
      }
      offset += g.schema(a).size();
      attr_offset.push_back(offset);
    }
  }

  std::vector<std::uint8_t> infected(n, 0);
  for (NodeId v : initial_infected) {
    if (v >= n) throw std::invalid_argument("initial case out of range");
    infected[v] = 1;
  }
  std::vector<int> treatment(n, 0);
  // Testing draws come from their own stream so that the infect/recover
  // draws are shared between scenarios.
  Rng test_rng(rng.NextU64());

  std::vector<std::int64_t> infected_in(group_count, 0);
  auto add_to_groups = [&](NodeId v, std::int64_t delta) {
    infected_in[0] += delta;
    for (const auto& go : group_of) infected_in[go[v]] += delta;
  };
  for (NodeId v = 0; v < n; ++v) {
    if (infected[v]) add_to_groups(v, 1);
  }
  std::int64_t susceptible = static_cast<std::int64_t>(n) - infected_in[0];

  const auto steps = static_cast<std::size_t>(cfg.steps());
  traj.prevalence.assign(group_count, std::vector<double>(steps, 0.0));
  traj.incidence.assign(group_count, std::vector<double>(steps, 0.0));
  traj.infected.assign(steps, 0);

  std::vector<std::uint8_t> at_start(n);
  std::vector<std::uint8_t> newly(n);
  std::vector<std::int64_t> new_in(group_count);
  std::vector<std::int64_t> susceptible_before(group_count);

  for (std::size_t t = 0; t < steps; ++t) {
    at_start = infected;
    for (std::size_t k = 0; k < group_count; ++k) {
      susceptible_before[k] = group_size[k] - infected_in[k];
    }

    if (intervene) {
      for (NodeId v = 0; v < n; ++v) {
        if (treatment[v] != 0) continue;
        if (test_rng.Bernoulli(cfg.intervention.test_rate) && at_start[v]) {
          treatment[v] = cfg.intervention.test_duration;
        }
      }
    }

    std::fill(newly.begin(), newly.end(), 0);
    for (NodeId u = 0; u < n; ++u) {
      if (!at_start[u]) continue;
      for (NodeId v : g.neighbors(u)) {
        if (at_start[v] || newly[v]) continue;
        if (rng.Bernoulli(cfg.p_inf)) newly[v] = 1;
      }
    }

    std::int64_t recovered = 0;
    for (NodeId u = 0; u < n; ++u) {
      if (!at_start[u]) continue;
      const double p = treatment[u] > 0 ? cfg.intervention.p_recov_treated
                                        : cfg.p_recov;
      if (rng.Uniform() < p) {
        infected[u] = 0;
        treatment[u] = 0;
        add_to_groups(u, -1);
        ++recovered;
      }
    }

    std::fill(new_in.begin(), new_in.end(), 0);
    for (NodeId v = 0; v < n; ++v) {
      if (!newly[v]) continue;
      infected[v] = 1;
      add_to_groups(v, 1);
      ++new_in[0];
      for (const auto& go : group_of) ++new_in[go[v]];
    }
    susceptible += recovered - new_in[0];

    for (NodeId v = 0; v < n; ++v) {
      if (treatment[v] > 0) --treatment[v];
    }

    if (susceptible + infected_in[0] != static_cast<std::int64_t>(n)) {
      ++traj.conservation_violations;
    }
    // Per-attribute group counts must add up to the population count.
    for (std::size_t a = 0; a < group_of.size(); ++a) {
      std::int64_t sum = 0;
      for (std::size_t k = attr_offset[a]; k < attr_offset[a + 1]; ++k) {
        sum += infected_in[k];
      }
      if (sum != infected_in[0]) ++traj.conservation_violations;
    }

    traj.infected[t] = infected_in[0];
    for (std::size_t k = 0; k < group_count; ++k) {
      traj.prevalence[k][t] =
          group_size[k] > 0 ? static_cast<double>(infected_in[k]) /
                                  static_cast<double>(group_size[k])
                            : 0.0;
      traj.incidence[k][t] =
          susceptible_before[k] > 0
              ? static_cast<double>(new_in[k]) /
                    static_cast<double>(susceptible_before[k])
              : 0.0;
    }
  }
  return traj;
}

EpidemicSummary Summarize(const EpidemicTrajectory& traj, const SimConfig& cfg) {
  if (traj.steps() != static_cast<std::size_t>(cfg.steps())) {
    throw std::invalid_argument("trajectory length does not match config");
  }
  EpidemicSummary s;
  s.groups = traj.groups;
  const std::size_t window = static_cast<std::size_t>(cfg.analytic_window);
  const std::size_t first = traj.steps() - window;
  auto mean = [&](const std::vector<double>& series) {
    if (window == 0) return std::nan("");
    double sum = 0;
    for (std::size_t t = first; t < series.size(); ++t) sum += series[t];
    return sum / static_cast<double>(window);
  };
  for (std::size_t k = 0; k < traj.groups.size(); ++k) {
    s.prevalence.push_back(mean(traj.prevalence[k]));
    s.incidence.push_back(mean(traj.incidence[k]));
  }
  return s;
}

RatioResult PrevalenceRatio(const EpidemicSummary& intervention,
                            const EpidemicSummary& baseline) {
  return Ratio(intervention.groups, intervention.prevalence, baseline.groups,
               baseline.prevalence);
}

RatioResult IncidenceRateRatio(const EpidemicSummary& intervention,
                               const EpidemicSummary& baseline) {
  return Ratio(intervention.groups, intervention.incidence, baseline.groups,
               baseline.incidence);
}

std::string TrajectoryCsv(const EpidemicTrajectory& traj, Scenario scenario) {
  std::string out = "step,scenario,metric,group,value\n";
  const std::string name(ScenarioName(scenario));
  for (std::size_t t = 0; t < traj.steps(); ++t) {
    for (std::size_t k = 0; k < traj.groups.size(); ++k) {
      const std::string prefix = std::to_string(t + 1) + "," + name + ",";
      out += prefix + "prevalence," + traj.groups[k] + "," +
             FormatDouble(traj.prevalence[k][t]) + "\n";
      out += prefix + "incidence_rate," + traj.groups[k] + "," +
             FormatDouble(traj.incidence[k][t]) + "\n";
    }
  }
  return out;
}

std::string SummaryCsv(const EpidemicSummary& summary, Scenario scenario) {
  std::string out = "scenario,metric,group,value\n";
  const std::string name(ScenarioName(scenario));
  for (std::size_t k = 0; k < summary.groups.size(); ++k) {
    out += name + ",prevalence," + summary.groups[k] + "," +
           FormatDouble(summary.prevalence[k]) + "\n";
    out += name + ",incidence_rate," + summary.groups[k] + "," +
           FormatDouble(summary.incidence[k]) + "\n";
  }
  return out;
}

nlohmann::json ToJson(const SimConfig& cfg) {
  return {{"p_inf", cfg.p_inf},
          {"p_recov", cfg.p_recov},
          {"initial_prevalence", cfg.initial_prevalence},
          {"burn_in", cfg.burn_in},
          {"analytic_window", cfg.analytic_window},
          {"scenario", std::string(ScenarioName(cfg.scenario))},
          {"test_rate", cfg.intervention.test_rate},
          {"test_duration", cfg.intervention.test_duration},
          {"p_recov_treated", cfg.intervention.p_recov_treated}};
}

SimConfig SimConfigFromJson(const nlohmann::json& j) {
  SimConfig cfg;
  cfg.p_inf = j.value("p_inf", cfg.p_inf);
  cfg.p_recov = j.value("p_recov", cfg.p_recov);
  cfg.initial_prevalence = j.value("initial_prevalence", cfg.initial_prevalence);
  cfg.burn_in = j.value("burn_in", cfg.burn_in);
  cfg.analytic_window = j.value("analytic_window", cfg.analytic_window);
  cfg.scenario = ParseScenario(j.value("scenario", std::string("baseline")));
  cfg.intervention.test_rate = j.value("test_rate", cfg.intervention.test_rate);
  cfg.intervention.test_duration =
      j.value("test_duration", cfg.intervention.test_duration);
  cfg.intervention.p_recov_treated =
      j.value("p_recov_treated", cfg.intervention.p_recov_treated);
  cfg.Validate();
  return cfg;
}

}  // namespace epidp
