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

#ifndef EPIDP_EXPERIMENT_H_
#define EPIDP_EXPERIMENT_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "epidp/anova.h"
#include "epidp/dp_release.h"
#include "epidp/epidemic.h"
#include "epidp/ergm.h"
#include "epidp/graph.h"
#include "epidp/random.h"
#include "epidp/sbm.h"
#include "json.hpp"

namespace epidp {

enum class ModelFamily { kSbm, kErgm };

std::string_view ModelFamilyName(ModelFamily f);
ModelFamily ParseModelFamily(std::string_view name);

struct AttributeSpec {
  AttributeSchema schema;
  std::vector<double> proportions;  // one per category, summing to 1
};

// Ground-truth network generator.
struct GeneratorConfig {
  std::size_t node_count = 1000;
  std::vector<AttributeSpec> attributes;
  ModelFamily family = ModelFamily::kErgm;
  ErgmSpec ergm_spec;
  ErgmParams ergm_params;
  std::optional<McmcConfig> mcmc;  // default McmcConfig::ForNodes
  SbmParams sbm;

  void Validate() const;
};

// Nodes with attributes assigned by exact quota (largest remainder) and then
// shuffled; no edges.
AttributedGraph SamplePopulation(const GeneratorConfig& config, Rng& rng);

// SamplePopulation followed by one draw from the configured model.
AttributedGraph GenerateObservedNetwork(const GeneratorConfig& config, Rng& rng);

struct SimSetting {
  std::string name;  // e.g. "high", "low"
  SimConfig config;  // scenario field is ignored
};

struct ExperimentPlan {
  ModelFamily model_family = ModelFamily::kErgm;
  std::vector<PrivacyBudget> epsilons;
  std::vector<int> delta_caps;
  int releases_per_cell = 5;
  int networks_per_release = 10;
  int sims_per_scenario = 10;
  std::vector<SimSetting> settings;
  std::uint64_t master_seed = 1;
  GeneratorConfig observed;
  std::string sbm_attribute = "age";
  ErgmTermOptions ergm_terms;
  FitConfig fit;
  std::optional<McmcConfig> mcmc;
  std::vector<std::string> quality_attributes = {"age", "race"};
  int degree_bins = 8;  // degree rows 0..bins-1 plus an overflow row

  void Validate() const;
};

// Desk-scale plan: 1000-node ERGM ground truth with age and race attributes,
// the full epsilon and delta grids, R=5, N=10, M=10, high and low settings.
ExperimentPlan DefaultPlan();

nlohmann::json ToJson(const GeneratorConfig& config);
GeneratorConfig GeneratorFromJson(const nlohmann::json& j);
nlohmann::json ToJson(const ExperimentPlan& plan);
ExperimentPlan PlanFromJson(const nlohmann::json& j);

enum class Condition { kObserved = 0, kNoDp = 1, kDp = 2 };
std::string_view ConditionName(Condition c);

struct ResultRow {
  std::string model;
  Condition condition = Condition::kObserved;
  std::optional<PrivacyBudget> epsilon;  // DP rows only
  std::optional<int> delta;              // DP rows only
  int release = -1;                      // -1 renders as NA
  int network = -1;
  int sim = -1;
  std::string scenario;
  std::string metric;
  std::string group;
  double value = 0;                      // NaN renders as NA
  std::string flags;                     // ';'-separated

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

struct ExperimentReport {
  std::vector<ResultRow> rows;
  std::int64_t simulations = 0;
  std::int64_t conservation_violations = 0;
  std::int64_t extinctions = 0;  // ratio values left missing
  int fits = 0;
  int nonconverged_fits = 0;
};

// Statistics released to fit the plan's model family.
std::vector<StatKind> ReleaseStatisticsFor(const ExperimentPlan& plan,
                                           const AttributedGraph& observed);

// Closed-form number of rows RunExperiment emits for `plan` and a graph with
// `group_count` epidemic groups (including ALL).
std::size_t ExpectedRowCount(const ExperimentPlan& plan, std::size_t group_count);

// Runs the full factorial sweep. Output is independent of `jobs`.
ExperimentReport RunExperiment(const ExperimentPlan& plan, int jobs = 1);

std::string ResultsCsv(std::span<const ResultRow> rows);
std::vector<ResultRow> ParseResultsCsv(std::string_view text);
void ExportResults(std::span<const ResultRow> rows,
                   const std::filesystem::path& path);

// Selects one nested R x N x M block of values for the variance table.
struct RowFilter {
  std::string model;
  std::string condition = "DP";
  std::string epsilon;
  std::string delta;
  std::string scenario;
  std::string metric = "prevalence";
  std::string group = "ALL";
};
struct NestedValues {
  std::vector<double> values;  // [release][network][sim]
  int releases = 0;
  int networks = 0;
  int sims = 0;
};
// Throws std::invalid_argument when the selection is empty or unbalanced.
NestedValues ExtractNested(std::span<const ResultRow> rows,
                           const RowFilter& filter);

// Figure-ready tidy tables: "prevalence_ratio", "groups", "epidemic",
// "quality", "degree", "variance".
std::vector<std::string> PlotKinds();
std::string PlotDataCsv(std::span<const ResultRow> rows, std::string_view kind);

}  // namespace epidp

#endif  // EPIDP_EXPERIMENT_H_
