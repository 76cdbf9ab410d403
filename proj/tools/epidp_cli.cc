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

// epidp: file-in/file-out driver for every pipeline stage.
//
// Exit status: 0 success, 1 domain error, 2 usage error.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "epidp/anova.h"
#include "epidp/csv.h"
#include "epidp/dp_release.h"
#include "epidp/epidemic.h"
#include "epidp/ergm.h"
#include "epidp/experiment.h"
#include "epidp/graph.h"
#include "epidp/random.h"
#include "epidp/sbm.h"
#include "epidp/statistics.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace epidp {
namespace {

constexpr int kDomainError = 1;
constexpr int kUsageError = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Relative output paths land under $EPIDP_RESULTS_DIR when it is set.
fs::path OutputPath(const std::string& path) {
  fs::path p(path);
  const char* dir = std::getenv("EPIDP_RESULTS_DIR");
  if (dir != nullptr && *dir != '\0' && p.is_relative()) return fs::path(dir) / p;
  return p;
}

void WriteOutput(const std::string& path, std::string_view text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  const fs::path p = OutputPath(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  WriteTextFile(p, text);
}

json ReadJson(const std::string& path) {
  try {
    return json::parse(ReadTextFile(path));
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

std::vector<AttributeSchema> SchemasFromFile(const std::string& path) {
  std::vector<AttributeSchema> out;
  if (path.empty()) return out;
  const json j = ReadJson(path);
  for (const auto& a : j.at("attributes")) {
    out.push_back({a.at("name").get<std::string>(),
                   a.at("categories").get<std::vector<std::string>>()});
  }
  return out;
}

// Loads a graph; a missing edges path means no edges.
AttributedGraph ReadGraph(const std::string& nodes, const std::string& edges,
                          const std::string& schema_path) {
  const auto schemas = SchemasFromFile(schema_path);
  if (edges.empty()) {
    return ParseGraph(ReadTextFile(nodes), "u,v\n", schemas);
  }
  return LoadGraph(nodes, edges, schemas);
}

std::string UtcTimestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<StatKind> PresetStatistics(const std::string& model,
                                       const std::string& attr,
                                       const AttributedGraph& g) {
  if (model == "sbm") return SbmStatistics(g.schema(g.AttributeIndex(attr)));
  if (model == "ergm") return MakeErgmSpec(g.schemas()).terms;
  throw UsageError("--model must be sbm or ergm");
}

json GraphStatistics(const AttributedGraph& g) {
  json out;
  out["nodes"] = g.node_count();
  out["edges"] = CountEdges(g);
  out["max_degree"] = g.max_degree();
  json min_degree = json::object();
  for (int d = 1; d <= std::max<int>(4, static_cast<int>(g.max_degree())); ++d) {
    min_degree[std::to_string(d)] = CountNodesWithMinDegree(g, d);
  }
  out["min_degree"] = min_degree;
  out["degree_histogram"] = DegreeHistogram(g);
  json attrs = json::object();
  for (const auto& schema : g.schemas()) {
    const CountMatrix m = MixingMatrix(g, schema.name);
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
      rows.push_back(row);
    }
    attrs[schema.name] = {
        {"categories", schema.categories},
        {"group_sizes", g.GroupSizes(g.AttributeIndex(schema.name))},
        {"mixing", rows},
        {"nodematch", NodematchPerGroup(g, schema.name)},
        {"total_nodematch", TotalNodematch(g, schema.name)},
        {"nodefactor", Nodefactor(g, schema.name)}};
  }
  out["attributes"] = attrs;
  return out;
}

struct GraphArgs {
  std::string nodes;
  std::string edges;
  std::string schema;

  void Add(CLI::App* cmd, bool edges_required) {
    cmd->add_option("--nodes", nodes, "Node CSV (node_id,<attributes>)")
        ->required()
        ->check(CLI::ExistingFile);
    auto* e = cmd->add_option("--edges", edges, "Edge CSV (u,v)")
                  ->check(CLI::ExistingFile);
    if (edges_required) e->required();
    cmd->add_option("--schema", schema,
                    "JSON with attributes[{name,categories}] fixing category "
                    "order (default: order of first appearance)")
        ->check(CLI::ExistingFile);
  }
  AttributedGraph Load() const { return ReadGraph(nodes, edges, schema); }
};

int Run(int argc, char** argv) {
  CLI::App app{"Node-DP network statistics, network models and SIS epidemics"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "epidp 1.0.0");

  // generate
  auto* gen = app.add_subcommand("generate", "Sample a ground-truth network");
  std::string gen_config, gen_nodes, gen_edges;
  std::uint64_t gen_seed = 0;
  gen->add_option("--config", gen_config,
                  "Generator JSON, or a plan JSON with an 'observed' field "
                  "(default: the built-in 1000-node generator)")
      ->check(CLI::ExistingFile);
  gen->add_option("--seed", gen_seed, "Random seed")->required();
  gen->add_option("--out-nodes", gen_nodes, "Output node CSV")->required();
  gen->add_option("--out-edges", gen_edges, "Output edge CSV")->required();

  // stats
  auto* stats = app.add_subcommand("stats", "Print exact statistics of a graph");
  GraphArgs stats_graph;
  stats_graph.Add(stats, false);
  std::string stats_out;
  stats->add_option("--out", stats_out, "Output JSON (default: stdout)");

  // release
  auto* rel = app.add_subcommand("release", "Node-DP release of statistics");
  GraphArgs rel_graph;
  rel_graph.Add(rel, false);
  std::string rel_epsilon, rel_model = "ergm", rel_attr = "age", rel_out;
  std::vector<std::string> rel_stats;
  int rel_delta = 0;
  std::uint64_t rel_seed = 0;
  bool rel_stamp = false;
  rel->add_option("--epsilon", rel_epsilon, "Privacy budget (number or inf)")
      ->required();
  rel->add_option("--delta-cap", rel_delta, "Truncation degree")
      ->required()
      ->check(CLI::PositiveNumber);
  rel->add_option("--seed", rel_seed, "Random seed")->required();
  rel->add_option("--statistic", rel_stats,
                  "Statistic descriptor, repeatable (e.g. edges, "
                  "min_degree(2), mixing(age,0,1)); overrides --model");
  rel->add_option("--model", rel_model,
                  "Preset statistic list: ergm or sbm")
      ->check(CLI::IsMember({"ergm", "sbm"}));
  rel->add_option("--attr", rel_attr, "Mixing attribute for the sbm preset");
  rel->add_option("--out", rel_out, "Output release JSON")->required();
  rel->add_flag("--stamp", rel_stamp,
                "Record the wall-clock time in the release (makes the output "
                "time-dependent)");

  // fit
  auto* fit = app.add_subcommand("fit", "Fit an SBM or ERGM to statistics");
  GraphArgs fit_graph;
  fit_graph.Add(fit, false);
  std::string fit_release, fit_model = "ergm", fit_attr = "age", fit_out;
  std::string fit_config_path;
  bool fit_exact = false;
  std::optional<std::uint64_t> fit_seed;
  fit->add_option("--release", fit_release, "Release JSON to fit")
      ->check(CLI::ExistingFile);
  fit->add_flag("--exact", fit_exact,
                "Fit exact statistics of the graph instead of a release");
  fit->add_option("--model", fit_model, "sbm or ergm")
      ->check(CLI::IsMember({"ergm", "sbm"}));
  fit->add_option("--attr", fit_attr, "SBM attribute");
  fit->add_option("--seed", fit_seed, "Random seed (required for ergm)");
  fit->add_option("--fit-config", fit_config_path,
                  "JSON with 'fit' and 'mcmc' settings")
      ->check(CLI::ExistingFile);
  fit->add_option("--out", fit_out, "Output model JSON")->required();

  // sample
  auto* smp = app.add_subcommand("sample", "Sample synthetic networks");
  GraphArgs smp_graph;
  smp_graph.Add(smp, false);
  std::string smp_model, smp_dir;
  int smp_count = 1;
  std::uint64_t smp_seed = 0;
  smp->add_option("--model", smp_model, "Model JSON from `fit`")
      ->required()
      ->check(CLI::ExistingFile);
  smp->add_option("--count", smp_count, "Number of networks")
      ->check(CLI::PositiveNumber);
  smp->add_option("--seed", smp_seed, "Random seed")->required();
  smp->add_option("--out-dir", smp_dir,
                  "Directory for network_<k>_nodes.csv / _edges.csv")
      ->required();

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run one SIS simulation");
  GraphArgs sim_graph;
  sim_graph.Add(sim, false);
  SimConfig sim_cfg;
  std::string sim_scenario = "baseline", sim_config_path, sim_traj, sim_summary;
  std::uint64_t sim_seed = 0;
  sim->add_option("--config", sim_config_path,
                  "SimConfig JSON; individual flags override it")
      ->check(CLI::ExistingFile);
  auto* o_scenario = sim->add_option("--scenario", sim_scenario,
                                     "baseline or test_and_treat");
  auto* o_pinf = sim->add_option("--p-inf", sim_cfg.p_inf, "Transmission probability");
  auto* o_prec = sim->add_option("--p-recov", sim_cfg.p_recov, "Recovery probability");
  auto* o_prev = sim->add_option("--initial-prevalence", sim_cfg.initial_prevalence,
                                 "Initially infected fraction");
  auto* o_burn = sim->add_option("--burn-in", sim_cfg.burn_in, "Burn-in steps");
  auto* o_win = sim->add_option("--window", sim_cfg.analytic_window,
                                "Analytic window steps");
  auto* o_rate = sim->add_option("--test-rate", sim_cfg.intervention.test_rate,
                                 "Testing probability per step");
  auto* o_dur = sim->add_option("--test-duration",
                                sim_cfg.intervention.test_duration,
                                "Treatment duration in steps");
  auto* o_trt = sim->add_option("--p-recov-treated",
                                sim_cfg.intervention.p_recov_treated,
                                "Recovery probability on treatment");
  sim->add_option("--seed", sim_seed, "Random seed")->required();
  sim->add_option("--trajectory", sim_traj, "Output per-step CSV");
  sim->add_option("--summary", sim_summary,
                  "Output summary CSV (default: stdout)");

  // experiment
  auto* exp = app.add_subcommand("experiment", "Run the factorial sweep");
  std::string exp_plan, exp_out, exp_dump;
  std::uint64_t exp_seed = 0;
  int exp_jobs = 1;
  exp->add_option("--plan", exp_plan,
                  "Plan JSON; omitted fields take desk-scale defaults")
      ->check(CLI::ExistingFile);
  exp->add_option("--seed", exp_seed, "Master seed")->required();
  exp->add_option("--jobs", exp_jobs, "Worker threads")
      ->check(CLI::PositiveNumber);
  exp->add_option("--out", exp_out, "Output results CSV")->required();
  exp->add_option("--dump-plan", exp_dump,
                  "Also write the fully resolved plan JSON here");

  // anova
  auto* anv = app.add_subcommand("anova", "Nested variance decomposition");
  std::string anv_results, anv_out;
  RowFilter filter;
  anv->add_option("--results", anv_results, "Results CSV")
      ->required()
      ->check(CLI::ExistingFile);
  anv->add_option("--model", filter.model, "Model family (empty: any)");
  anv->add_option("--condition", filter.condition,
                  "OBSERVED, NO_DP or DP")
      ->capture_default_str();
  anv->add_option("--epsilon", filter.epsilon, "Epsilon label (e.g. 5, inf)");
  anv->add_option("--delta", filter.delta, "Delta cap");
  anv->add_option("--scenario", filter.scenario, "e.g. high.baseline")
      ->required();
  anv->add_option("--metric", filter.metric, "Metric")->capture_default_str();
  anv->add_option("--group", filter.group, "Group label")->capture_default_str();
  anv->add_option("--out", anv_out, "Output CSV (default: stdout)");

  // plotdata
  auto* plt = app.add_subcommand("plotdata", "Figure-ready tidy tables");
  std::string plt_results, plt_kind, plt_out, plt_dir;
  plt->add_option("--results", plt_results, "Results CSV")
      ->required()
      ->check(CLI::ExistingFile);
  plt->add_option("--kind", plt_kind, "Table kind")
      ->check(CLI::IsMember(PlotKinds()));
  plt->add_option("--out", plt_out, "Output CSV for --kind (default: stdout)");
  plt->add_option("--out-dir", plt_dir, "Write every kind as <kind>.csv here")
      ->excludes("--kind");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*gen) {
      GeneratorConfig config = DefaultPlan().observed;
      if (!gen_config.empty()) {
        const json j = ReadJson(gen_config);
        config = j.contains("observed") ? PlanFromJson(j).observed
                                        : GeneratorFromJson(j);
      }
      Rng rng(gen_seed);
      const AttributedGraph g = GenerateObservedNetwork(config, rng);
      WriteOutput(gen_nodes, NodesCsv(g));
      WriteOutput(gen_edges, EdgesCsv(g));
      std::cerr << "generated " << g.node_count() << " nodes, "
                << g.edge_count() << " edges\n";
    } else if (*stats) {
      WriteOutput(stats_out, GraphStatistics(stats_graph.Load()).dump(2) + "\n");
    } else if (*rel) {
      const AttributedGraph g = rel_graph.Load();
      ReleaseSpec spec;
      if (rel_stats.empty()) {
        spec.statistics = PresetStatistics(rel_model, rel_attr, g);
      } else {
        for (const auto& s : rel_stats) spec.statistics.push_back(StatKind::Parse(s));
      }
      spec.epsilon = PrivacyBudget::Parse(rel_epsilon);
      spec.delta_cap = rel_delta;
      Rng rng(rel_seed);
      PrivateRelease release = ReleaseStatistics(g, spec, rng);
      release.seed_path = "cli/release";
      if (rel_stamp) release.timestamp = UtcTimestamp();
      WriteOutput(rel_out, ToJson(release).dump(2) + "\n");
    } else if (*fit) {
      if (fit_exact == !fit_release.empty()) {
        throw UsageError("fit: give exactly one of --release or --exact");
      }
      const AttributedGraph g = fit_graph.Load();
      PrivateRelease release;
      if (fit_exact) {
        if (fit_graph.edges.empty()) throw UsageError("fit --exact needs --edges");
        release = ExactRelease(g, PresetStatistics(fit_model, fit_attr, g));
      } else {
        release = ReleaseFromJson(ReadJson(fit_release));
      }
      if (fit_model == "sbm") {
        const std::size_t a = g.AttributeIndex(fit_attr);
        const SbmParams params =
            FitSbm(MixingFromRelease(release, fit_attr, g.schema(a).size()),
                   fit_attr, g.GroupSizes(a));
        WriteOutput(fit_out, ToJson(params).dump(2) + "\n");
      } else {
        if (!fit_seed) throw UsageError("fit --model ergm requires --seed");
        ErgmSpec spec{release.kinds()};
        spec.Validate(g.schemas());
        FitConfig fc;
        McmcConfig mcmc = McmcConfig::ForNodes(g.node_count());
        if (!fit_config_path.empty()) {
          const json j = ReadJson(fit_config_path);
          json plan = json::object();
          if (j.contains("fit")) plan["fit"] = j.at("fit");
          if (j.contains("mcmc")) plan["mcmc"] = j.at("mcmc");
          const ExperimentPlan p = PlanFromJson(plan);
          fc = p.fit;
          if (p.mcmc) mcmc = *p.mcmc;
        }
        Rng rng(*fit_seed);
        const ErgmFit result =
            FitErgm(release.values(), spec, g.WithoutEdges(), fc, mcmc, rng);
        WriteOutput(fit_out, ToJson(result, spec).dump(2) + "\n");
        if (!result.diagnostics.converged) {
          std::cerr << "warning: ERGM fit did not converge\n";
        }
      }
    } else if (*smp) {
      const AttributedGraph population = smp_graph.Load().WithoutEdges();
      const json model = ReadJson(smp_model);
      const std::string family = model.at("family").get<std::string>();
      Rng rng(smp_seed);
      std::vector<AttributedGraph> nets;
      if (family == "sbm") {
        const SbmParams params = SbmFromJson(model);
        for (int k = 0; k < smp_count; ++k) {
          nets.push_back(SampleSbm(params, population, rng));
        }
      } else {
        ErgmSpec spec;
        ErgmParams params;
        ErgmFromJson(model, spec, params);
        spec.Validate(population.schemas());
        nets = SampleErgmNetworks(params, spec, population,
                                  McmcConfig::ForNodes(population.node_count()),
                                  smp_count, rng);
      }
      for (std::size_t k = 0; k < nets.size(); ++k) {
        const fs::path dir = OutputPath(smp_dir);
        fs::create_directories(dir);
        const std::string stem = "network_" + std::to_string(k);
        WriteTextFile(dir / (stem + "_nodes.csv"), NodesCsv(nets[k]));
        WriteTextFile(dir / (stem + "_edges.csv"), EdgesCsv(nets[k]));
      }
    } else if (*sim) {
      SimConfig cfg = sim_cfg;
      if (!sim_config_path.empty()) {
        cfg = SimConfigFromJson(ReadJson(sim_config_path));
        // Explicit flags win over the file.
        if (o_pinf->count()) cfg.p_inf = sim_cfg.p_inf;
        if (o_prec->count()) cfg.p_recov = sim_cfg.p_recov;
        if (o_prev->count()) cfg.initial_prevalence = sim_cfg.initial_prevalence;
        if (o_burn->count()) cfg.burn_in = sim_cfg.burn_in;
        if (o_win->count()) cfg.analytic_window = sim_cfg.analytic_window;
        if (o_rate->count()) cfg.intervention.test_rate = sim_cfg.intervention.test_rate;
        if (o_dur->count()) {
          cfg.intervention.test_duration = sim_cfg.intervention.test_duration;
        }
        if (o_trt->count()) {
          cfg.intervention.p_recov_treated = sim_cfg.intervention.p_recov_treated;
        }
      }
      if (o_scenario->count() || sim_config_path.empty()) {
        cfg.scenario = ParseScenario(sim_scenario);
      }
      for (const auto& w : cfg.Validate()) std::cerr << "warning: " << w << "\n";
      const AttributedGraph g = sim_graph.Load();
      Rng rng(sim_seed);
      const EpidemicTrajectory traj = RunSis(g, cfg, rng);
      if (!sim_traj.empty()) WriteOutput(sim_traj, TrajectoryCsv(traj, cfg.scenario));
      WriteOutput(sim_summary, SummaryCsv(Summarize(traj, cfg), cfg.scenario));
    } else if (*exp) {
      json j = exp_plan.empty() ? json::object() : ReadJson(exp_plan);
      j["master_seed"] = exp_seed;
      const ExperimentPlan plan = PlanFromJson(j);
      if (!exp_dump.empty()) WriteOutput(exp_dump, ToJson(plan).dump(2) + "\n");
      const ExperimentReport report = RunExperiment(plan, exp_jobs);
      WriteOutput(exp_out, ResultsCsv(report.rows));
      std::cerr << "rows " << report.rows.size() << ", simulations "
                << report.simulations << ", conservation violations "
                << report.conservation_violations << ", extinct ratios "
                << report.extinctions << ", nonconverged fits "
                << report.nonconverged_fits << "/" << report.fits << "\n";
    } else if (*anv) {
      const auto rows = ParseResultsCsv(ReadTextFile(anv_results));
      const NestedValues nv = ExtractNested(rows, filter);
      WriteOutput(anv_out, VarianceTableCsv(DecomposeVariance(
                               nv.values, nv.releases, nv.networks, nv.sims)));
    } else if (*plt) {
      const auto rows = ParseResultsCsv(ReadTextFile(plt_results));
      if (!plt_dir.empty()) {
        for (const auto& kind : PlotKinds()) {
          WriteOutput((fs::path(plt_dir) / (kind + ".csv")).string(),
                      PlotDataCsv(rows, kind));
        }
      } else {
        if (plt_kind.empty()) throw UsageError("plotdata needs --kind or --out-dir");
        WriteOutput(plt_out, PlotDataCsv(rows, plt_kind));
      }
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDomainError;
  }
  return 0;
}

}  // namespace
}  // namespace epidp

int main(int argc, char** argv) { return epidp::Run(argc, argv); }
