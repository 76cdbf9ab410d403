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

#ifndef EPIDP_EPIDEMIC_H_
#define EPIDP_EPIDEMIC_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "epidp/graph.h"
#include "epidp/random.h"
#include "json.hpp"

namespace epidp {

enum class Scenario { kBaseline, kTestAndTreat };

std::string_view ScenarioName(Scenario s);
Scenario ParseScenario(std::string_view name);

struct TestAndTreat {
  double test_rate = 0.1;
  int test_duration = 2;
  double p_recov_treated = 0.5;
};

struct SimConfig {
  double p_inf = 0.75;
  double p_recov = 0.1;
  double initial_prevalence = 0.2;
  int burn_in = 500;
  int analytic_window = 100;
  Scenario scenario = Scenario::kBaseline;
  TestAndTreat intervention;

  // Throws std::invalid_argument on out-of-range values. Returns warnings
  // for legal but unusual settings.
  std::vector<std::string> Validate() const;
  int steps() const { return burn_in + analytic_window; }
};

// Per-step series. Group 0 is the whole population ("ALL"); then one group
// per category of each attribute, labelled "<attr>:<category>".
struct EpidemicTrajectory {
  std::vector<std::string> groups;
  std::vector<std::vector<double>> prevalence;  // [group][step]
  std::vector<std::vector<double>> incidence;   // [group][step]
  std::vector<std::int64_t> infected;           // population count per step
  std::int64_t conservation_violations = 0;

  std::size_t steps() const { return infected.size(); }
};

struct EpidemicSummary {
  std::vector<std::string> groups;
  std::vector<double> prevalence;  // analytic-window mean per group
  std::vector<double> incidence;
};

std::vector<std::string> EpidemicGroups(const AttributedGraph& g);

// Discrete-time SIS on a fixed network. Each step runs, from the states at
// the start of the step: test (intervention only), infect along every
// infected-susceptible edge, recover, decrement treatment counters, record.
// Seeds floor(initial_prevalence * n) uniformly chosen nodes; throws if that
// is zero.
EpidemicTrajectory RunSis(const AttributedGraph& g, const SimConfig& cfg,
                          Rng& rng);
// Same, with an explicit set of initially infected nodes.
EpidemicTrajectory RunSis(const AttributedGraph& g, const SimConfig& cfg,
                          Rng& rng, std::span<const NodeId> initial_infected);

// Means of every series over the final analytic_window steps.
EpidemicSummary Summarize(const EpidemicTrajectory& traj, const SimConfig& cfg);

// Intervention / baseline per group; nullopt where the baseline mean is 0.
struct RatioResult {
  std::vector<std::string> groups;
  std::vector<std::optional<double>> values;
  int missing = 0;
};
RatioResult PrevalenceRatio(const EpidemicSummary& intervention,
                            const EpidemicSummary& baseline);
RatioResult IncidenceRateRatio(const EpidemicSummary& intervention,
                               const EpidemicSummary& baseline);

// Long-format dump: step,scenario,metric,group,value
std::string TrajectoryCsv(const EpidemicTrajectory& traj, Scenario scenario);
std::string SummaryCsv(const EpidemicSummary& summary, Scenario scenario);

nlohmann::json ToJson(const SimConfig& cfg);
SimConfig SimConfigFromJson(const nlohmann::json& j);

}  // namespace epidp

#endif  // EPIDP_EPIDEMIC_H_
