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

#include "epidp/experiment.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <stdexcept>
#include <thread>
#include <tuple>
#include <unordered_map>
#include <utility>

#include "epidp/csv.h"
#include "epidp/statistics.h"

namespace epidp {
namespace {

using nlohmann::json;

constexpr char kResultsHeader[] =
    "model,condition,epsilon,delta,release,network,sim,scenario,metric,group,"
    "value,flags";

// Runs fn(0..count-1) on up to `jobs` threads. The first exception thrown by
// any task is rethrown after all workers finish.
template <typename Fn>
void ParallelFor(std::size_t count, int jobs, Fn&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(jobs, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

void CheckKeys(const json& j, std::initializer_list<const char*> allowed,
               const char* what) {
  if (!j.is_object()) {
    throw std::invalid_argument(std::string(what) + " must be a JSON object");
  }
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* key : allowed) known = known || item.key() == key;
    if (!known) {
      throw std::invalid_argument(std::string("unknown ") + what + " field '" +
                                  item.key() + "'");
    }
  }
}

json ToJson(const McmcConfig& m) {
  return {{"burn_in", m.burn_in},
          {"thinning", m.thinning},
          {"chain_length", m.chain_length}};
}

McmcConfig McmcFromJson(const json& j) {
  CheckKeys(j, {"burn_in", "thinning", "chain_length"}, "mcmc");
  McmcConfig m;
  m.burn_in = j.at("burn_in").get<std::int64_t>();
  m.thinning = j.at("thinning").get<std::int64_t>();
  m.chain_length = j.at("chain_length").get<std::int64_t>();
  m.Validate();
  return m;
}

json ToJson(const FitConfig& f) {
  return {{"initial_gain", f.initial_gain},
          {"gain_decay", f.gain_decay},
          {"scaling_samples", f.scaling_samples},
          {"subphases", f.subphases},
          {"subphase_iterations", f.subphase_iterations},
          {"interval", f.interval},
          {"check_samples", f.check_samples},
          {"tolerance", f.tolerance},
          {"max_iterations", f.max_iterations},
          {"theta_cap", f.theta_cap},
          {"max_newton_step", f.max_newton_step},
          {"newton_damping", f.newton_damping},
          {"newton_ridge", f.newton_ridge}};
}

FitConfig FitFromJson(const json& j) {
  CheckKeys(j,
            {"initial_gain", "gain_decay", "scaling_samples", "subphases",
             "subphase_iterations", "interval", "check_samples", "tolerance",
             "max_iterations", "theta_cap", "max_newton_step",
             "newton_damping", "newton_ridge"},
            "fit");
  FitConfig f;
  f.initial_gain = j.value("initial_gain", f.initial_gain);
  f.gain_decay = j.value("gain_decay", f.gain_decay);
  f.scaling_samples = j.value("scaling_samples", f.scaling_samples);
  f.subphases = j.value("subphases", f.subphases);
  f.subphase_iterations = j.value("subphase_iterations", f.subphase_iterations);
  f.interval = j.value("interval", f.interval);
  f.check_samples = j.value("check_samples", f.check_samples);
  f.tolerance = j.value("tolerance", f.tolerance);
  f.max_iterations = j.value("max_iterations", f.max_iterations);
  f.theta_cap = j.value("theta_cap", f.theta_cap);
  f.max_newton_step = j.value("max_newton_step", f.max_newton_step);
  f.newton_damping = j.value("newton_damping", f.newton_damping);
  f.newton_ridge = j.value("newton_ridge", f.newton_ridge);
  f.Validate();
  return f;
}

json ToJson(const ErgmTermOptions& o) {
  return {{"min_degrees", o.min_degrees},
          {"nodematch_attr", o.nodematch_attr},
          {"total_nodematch_attr", o.total_nodematch_attr},
          {"nodefactor_attrs", o.nodefactor_attrs},
          {"drop_reference_group", o.drop_reference_group}};
}

ErgmTermOptions TermOptionsFromJson(const json& j) {
  CheckKeys(j,
            {"min_degrees", "nodematch_attr", "total_nodematch_attr",
             "nodefactor_attrs", "drop_reference_group"},
            "ergm_terms");
  ErgmTermOptions o;
  o.min_degrees = j.value("min_degrees", o.min_degrees);
  o.nodematch_attr = j.value("nodematch_attr", o.nodematch_attr);
  o.total_nodematch_attr =
      j.value("total_nodematch_attr", o.total_nodematch_attr);
  o.nodefactor_attrs = j.value("nodefactor_attrs", o.nodefactor_attrs);
  o.drop_reference_group =
      j.value("drop_reference_group", o.drop_reference_group);
  return o;
}

std::vector<AttributeSchema> Schemas(const GeneratorConfig& config) {
  std::vector<AttributeSchema> out;
  for (const auto& a : config.attributes) out.push_back(a.schema);
  return out;
}

std::string OptionalInt(int v) { return v < 0 ? "NA" : std::to_string(v); }

int ParseOptionalInt(const std::string& s, int line) {
  if (s == "NA") return -1;
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used == s.size() && v >= 0) return v;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("results line " + std::to_string(line) +
                              ": bad index '" + s + "'");
}

std::string EpsilonText(const ResultRow& r) {
  return r.epsilon ? r.epsilon->ToString() : "NA";
}

std::string DeltaText(const ResultRow& r) {
  return r.delta ? std::to_string(*r.delta) : "NA";
}

// Sort key of a block of rows that share every field up to `network`.
struct BlockKey {
  std::string model;
  int condition;
  double epsilon;
  int delta;
  int release;
  int network;

  auto Tie() const {
    return std::tie(model, condition, epsilon, delta, release, network);
  }
  bool operator<(const BlockKey& o) const { return Tie() < o.Tie(); }
};

BlockKey KeyOf(const ResultRow& r) {
  return {r.model,
          static_cast<int>(r.condition),
          r.epsilon ? r.epsilon->AsDouble() : -1.0,
          r.delta.value_or(-1),
          r.release,
          r.network};
}

// One fitted model and its synthetic networks.
struct Unit {
  Condition condition;
  std::optional<PrivacyBudget> epsilon;
  std::optional<int> delta;
  int release = -1;
  std::vector<AttributedGraph> networks;
  bool converged = true;
};

std::vector<SeedPart> UnitPath(const Unit& u) {
  return {std::string(ConditionName(u.condition)),
          u.epsilon ? u.epsilon->ToString() : std::string("NA"),
          static_cast<std::int64_t>(u.delta.value_or(-1)),
          static_cast<std::int64_t>(u.release)};
}

std::vector<SeedPart> Extend(std::vector<SeedPart> path,
                             std::initializer_list<SeedPart> more) {
  path.insert(path.end(), more.begin(), more.end());
  return path;
}

void FitUnit(const ExperimentPlan& plan, const AttributedGraph& observed,
             const std::vector<StatKind>& kinds, Unit& unit, int& fits,
             int& nonconverged) {
  const auto base = UnitPath(unit);
  PrivateRelease release;
  if (unit.condition == Condition::kNoDp) {
    release = ExactRelease(observed, kinds);
  } else {
    ReleaseSpec spec{kinds, *unit.epsilon, *unit.delta};
    Rng rng(DeriveSeed(plan.master_seed, Extend(base, {"release"})));
    release = ReleaseStatistics(observed, spec, rng);
  }
  Rng sample_rng(DeriveSeed(plan.master_seed, Extend(base, {"sample"})));
  if (plan.model_family == ModelFamily::kSbm) {
    const std::size_t a = observed.AttributeIndex(plan.sbm_attribute);
    const SbmParams params =
        FitSbm(MixingFromRelease(release, plan.sbm_attribute,
                                 observed.schema(a).size()),
               plan.sbm_attribute, observed.GroupSizes(a));
    fits = 1;
    for (int k = 0; k < plan.networks_per_release; ++k) {
      unit.networks.push_back(SampleSbm(params, observed, sample_rng));
    }
    return;
  }
  const ErgmSpec spec = MakeErgmSpec(observed.schemas(), plan.ergm_terms);
  const AttributedGraph population = observed.WithoutEdges();
  const McmcConfig mcmc =
      plan.mcmc.value_or(McmcConfig::ForNodes(observed.node_count()));
  Rng fit_rng(DeriveSeed(plan.master_seed, Extend(base, {"fit"})));
  const ErgmFit fit =
      FitErgm(release.values(), spec, population, plan.fit, mcmc, fit_rng);
  fits = 1;
  nonconverged = fit.diagnostics.converged ? 0 : 1;
  unit.converged = fit.diagnostics.converged;
  unit.networks = SampleErgmNetworks(fit.params, spec, population, mcmc,
                                     plan.networks_per_release, sample_rng);
}

struct NetworkTask {
  const Unit* unit = nullptr;  // null for the observed network itself
  int network = -1;
  const AttributedGraph* graph = nullptr;
};

struct TaskOutput {
  std::vector<ResultRow> rows;
  std::int64_t simulations = 0;
  std::int64_t violations = 0;
  std::int64_t extinctions = 0;
};

void RunNetworkTask(const ExperimentPlan& plan, const AttributedGraph& observed,
                    const NetworkTask& task, TaskOutput& out) {
  const AttributedGraph& g = *task.graph;
  ResultRow proto;
  proto.model = std::string(ModelFamilyName(plan.model_family));
  proto.condition = task.unit ? task.unit->condition : Condition::kObserved;
  if (task.unit) {
    proto.epsilon = task.unit->epsilon;
    proto.delta = task.unit->delta;
    proto.release = task.unit->release;
    if (!task.unit->converged) proto.flags = "nonconverged";
  }
  proto.network = task.network;
  auto emit = [&](int sim, const std::string& scenario,
                  const std::string& metric, const std::string& group,
                  double value, bool extinct) {
    ResultRow r = proto;
    r.sim = sim;
    r.scenario = scenario;
    r.metric = metric;
    r.group = group;
    r.value = value;
    if (extinct) r.flags += r.flags.empty() ? "extinct" : ";extinct";
    out.rows.push_back(std::move(r));
  };

  const QualityMetrics quality =
      ComputeQualityMetrics(g, observed, plan.quality_attributes);
  std::vector<std::string> quality_keys = {"edges", "concurrent"};
  for (const auto& a : plan.quality_attributes) {
    quality_keys.push_back("homophily_" + a);
  }
  for (const auto& key : quality_keys) {
    const auto& v = quality.at(key);
    emit(-1, "network", "quality_" + key, "ALL", v ? *v : std::nan(""), false);
  }
  const std::vector<std::int64_t> hist = DegreeHistogram(g);
  const std::size_t bins = static_cast<std::size_t>(plan.degree_bins);
  for (std::size_t b = 0; b <= bins; ++b) {
    double count = 0;
    if (b < bins) {
      count = b < hist.size() ? static_cast<double>(hist[b]) : 0.0;
    } else {
      for (std::size_t d = bins; d < hist.size(); ++d) {
        count += static_cast<double>(hist[d]);
      }
    }
    emit(-1, "network", "degree_count",
         b < bins ? std::to_string(b) : std::to_string(bins) + "+", count,
         false);
  }

  std::vector<SeedPart> base =
      task.unit ? UnitPath(*task.unit)
                : std::vector<SeedPart>{std::string("OBSERVED"),
                                        std::string("NA"), std::int64_t{-1},
                                        std::int64_t{-1}};
  base.push_back(static_cast<std::int64_t>(task.network));
  for (const auto& setting : plan.settings) {
    for (int sim = 0; sim < plan.sims_per_scenario; ++sim) {
      EpidemicSummary summary[2];
      const Scenario scenarios[2] = {Scenario::kBaseline,
                                     Scenario::kTestAndTreat};
      for (int s = 0; s < 2; ++s) {
        SimConfig cfg = setting.config;
        cfg.scenario = scenarios[s];
        const std::string name(ScenarioName(scenarios[s]));
        Rng rng(DeriveSeed(
            plan.master_seed,
            Extend(base, {setting.name, static_cast<std::int64_t>(sim), name})));
        const EpidemicTrajectory traj = RunSis(g, cfg, rng);
        out.violations += traj.conservation_violations;
        ++out.simulations;
        summary[s] = Summarize(traj, cfg);
        const std::string scenario = setting.name + "." + name;
        for (std::size_t k = 0; k < summary[s].groups.size(); ++k) {
          emit(sim, scenario, "prevalence", summary[s].groups[k],
               summary[s].prevalence[k], false);
          emit(sim, scenario, "incidence_rate", summary[s].groups[k],
               summary[s].incidence[k], false);
        }
      }
      const RatioResult pr = PrevalenceRatio(summary[1], summary[0]);
      const RatioResult ir = IncidenceRateRatio(summary[1], summary[0]);
      out.extinctions += pr.missing + ir.missing;
      const std::string scenario = setting.name + ".paired";
      for (std::size_t k = 0; k < pr.groups.size(); ++k) {
        emit(sim, scenario, "prevalence_ratio", pr.groups[k],
             pr.values[k].value_or(std::nan("")), !pr.values[k]);
        emit(sim, scenario, "incidence_rate_ratio", ir.groups[k],
             ir.values[k].value_or(std::nan("")), !ir.values[k]);
      }
    }
  }
}

struct Aggregate {
  std::vector<std::string> key;
  std::size_t n = 0;
  std::size_t missing = 0;
  double sum = 0;
  double sum_sq = 0;
};

std::vector<std::string> RowKey(const ResultRow& r) {
  return {r.model, std::string(ConditionName(r.condition)),
          EpsilonText(r), DeltaText(r), r.scenario, r.metric, r.group};
}

std::string AggregateCsv(std::span<const ResultRow> rows,
                         bool (*keep)(const ResultRow&)) {
  std::vector<Aggregate> groups;
  std::map<std::vector<std::string>, std::size_t> index;
  for (const auto& r : rows) {
    if (!keep(r)) continue;
    auto key = RowKey(r);
    auto [it, inserted] = index.emplace(key, groups.size());
    if (inserted) groups.push_back(Aggregate{std::move(key)});
    Aggregate& a = groups[it->second];
    if (std::isnan(r.value)) {
      ++a.missing;
      continue;
    }
    ++a.n;
    a.sum += r.value;
    a.sum_sq += r.value * r.value;
  }
  std::string out =
      "model,condition,epsilon,delta,scenario,metric,group,n,missing,mean,sd,"
      "se\n";
  for (const auto& a : groups) {
    for (const auto& k : a.key) out += k + ",";
    const double n = static_cast<double>(a.n);
    const double mean = a.n ? a.sum / n : std::nan("");
    double sd = std::nan("");
    if (a.n > 1) {
      sd = std::sqrt(std::max(0.0, (a.sum_sq - n * mean * mean) / (n - 1)));
    }
    const double se = a.n > 1 ? sd / std::sqrt(n) : std::nan("");
    out += std::to_string(a.n) + "," + std::to_string(a.missing) + "," +
           FormatDouble(mean) + "," + FormatDouble(sd) + "," +
           FormatDouble(se) + "\n";
  }
  return out;
}

bool EndsWith(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string VarianceCsv(std::span<const ResultRow> rows) {
  std::vector<RowFilter> cells;
  std::set<std::vector<std::string>> seen;
  for (const auto& r : rows) {
    if (r.metric != "prevalence" || r.group != "ALL" ||
        !EndsWith(r.scenario, ".baseline")) {
      continue;
    }
    RowFilter f{r.model, std::string(ConditionName(r.condition)),
                EpsilonText(r), DeltaText(r), r.scenario, r.metric, r.group};
    if (seen.insert(RowKey(r)).second) cells.push_back(f);
  }
  std::string out =
      "model,condition,epsilon,delta,scenario,metric,group,source,df,ss,ms,"
      "var_pct\n";
  for (const auto& f : cells) {
    const NestedValues nv = ExtractNested(rows, f);
    const VarianceDecomposition v =
        DecomposeVariance(nv.values, nv.releases, nv.networks, nv.sims);
    const std::string prefix = f.model + "," + f.condition + "," + f.epsilon +
                               "," + f.delta + "," + f.scenario + "," +
                               f.metric + "," + f.group + ",";
    for (const auto& s : v.sources) {
      out += prefix + s.source + "," + std::to_string(s.df) + "," +
             FormatDouble(s.ss) + "," + FormatDouble(s.ms) + "," +
             FormatDouble(s.var_pct) + "\n";
    }
  }
  return out;
}

}  // namespace

std::string_view ModelFamilyName(ModelFamily f) {
  return f == ModelFamily::kSbm ? "sbm" : "ergm";
}

ModelFamily ParseModelFamily(std::string_view name) {
  if (name == "sbm" || name == "SBM") return ModelFamily::kSbm;
  if (name == "ergm" || name == "ERGM") return ModelFamily::kErgm;
  throw std::invalid_argument("unknown model family '" + std::string(name) +
                              "'");
}

std::string_view ConditionName(Condition c) {
  switch (c) {
    case Condition::kObserved:
      return "OBSERVED";
    case Condition::kNoDp:
      return "NO_DP";
    case Condition::kDp:
      return "DP";
  }
  return "?";
}

void GeneratorConfig::Validate() const {
  if (node_count < 1) throw std::invalid_argument("node_count must be >= 1");
  if (attributes.empty()) {
    throw std::invalid_argument("generator declares no attributes");
  }
  std::set<std::string> names;
  for (const auto& a : attributes) {
    a.schema.Validate();
    if (!names.insert(a.schema.name).second) {
      throw std::invalid_argument("attribute '" + a.schema.name +
                                  "' declared twice");
    }
    if (a.proportions.size() != a.schema.size()) {
      throw std::invalid_argument("attribute '" + a.schema.name +
                                  "': one proportion per category required");
    }
    double total = 0;
    for (double p : a.proportions) {
      if (!(p >= 0) || !std::isfinite(p)) {
        throw std::invalid_argument("attribute '" + a.schema.name +
                                    "': proportions must be >= 0");
      }
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw std::invalid_argument("attribute '" + a.schema.name +
                                  "': proportions must sum to 1");
    }
  }
  const auto schemas = Schemas(*this);
  if (family == ModelFamily::kErgm) {
    ergm_spec.Validate(schemas);
    if (ergm_params.theta.size() != ergm_spec.terms.size()) {
      throw std::invalid_argument("generator theta has " +
                                  std::to_string(ergm_params.theta.size()) +
                                  " entries for " +
                                  std::to_string(ergm_spec.terms.size()) +
                                  " terms");
    }
    for (double t : ergm_params.theta) {
      if (!std::isfinite(t)) {
        throw std::invalid_argument("generator theta must be finite");
      }
    }
    if (mcmc) mcmc->Validate();
  } else {
    sbm.Validate();
    const auto it =
        std::find_if(schemas.begin(), schemas.end(),
                     [&](const AttributeSchema& s) { return s.name == sbm.attr; });
    if (it == schemas.end()) {
      throw std::invalid_argument("SBM attribute '" + sbm.attr +
                                  "' is not declared");
    }
    if (static_cast<std::size_t>(sbm.edge_prob.rows()) != it->size()) {
      throw std::invalid_argument("SBM matrix size does not match attribute '" +
                                  sbm.attr + "'");
    }
  }
}

AttributedGraph SamplePopulation(const GeneratorConfig& config, Rng& rng) {
  config.Validate();
  const std::size_t n = config.node_count;
  std::vector<std::vector<int>> labels;
  for (const auto& a : config.attributes) {
    const std::size_t k = a.schema.size();
    std::vector<std::size_t> quota(k);
    std::vector<std::pair<double, std::size_t>> remainder;
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < k; ++c) {
      const double exact = a.proportions[c] * static_cast<double>(n);
      quota[c] = static_cast<std::size_t>(std::floor(exact));
      assigned += quota[c];
      remainder.emplace_back(exact - std::floor(exact), c);
    }
    std::stable_sort(remainder.begin(), remainder.end(),
                     [](const auto& x, const auto& y) { return x.first > y.first; });
    for (std::size_t r = 0; assigned < n; ++r, ++assigned) {
      ++quota[remainder[r % k].second];
    }
    std::vector<int> column;
    column.reserve(n);
    for (std::size_t c = 0; c < k; ++c) {
      column.insert(column.end(), quota[c], static_cast<int>(c));
    }
    for (std::size_t i = n; i > 1; --i) {
      std::swap(column[i - 1], column[rng.Below(i)]);
    }
    labels.push_back(std::move(column));
  }
  return AttributedGraph(Schemas(config), std::move(labels), {});
}

AttributedGraph GenerateObservedNetwork(const GeneratorConfig& config,
                                        Rng& rng) {
  const AttributedGraph population = SamplePopulation(config, rng);
  if (config.family == ModelFamily::kSbm) {
    return SampleSbm(config.sbm, population, rng);
  }
  return SampleErgm(config.ergm_params, config.ergm_spec, population,
                    config.mcmc.value_or(McmcConfig::ForNodes(config.node_count)),
                    rng);
}

void ExperimentPlan::Validate() const {
  if (epsilons.empty()) throw std::invalid_argument("plan lists no epsilons");
  if (delta_caps.empty()) {
    throw std::invalid_argument("plan lists no delta caps");
  }
  for (int d : delta_caps) {
    if (d < 1) throw std::invalid_argument("delta caps must be >= 1");
  }
  if (std::set<int>(delta_caps.begin(), delta_caps.end()).size() !=
      delta_caps.size()) {
    throw std::invalid_argument("plan lists a delta cap twice");
  }
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    for (std::size_t j = i + 1; j < epsilons.size(); ++j) {
      if (epsilons[i] == epsilons[j]) {
        throw std::invalid_argument("plan lists an epsilon twice");
      }
    }
  }
  if (releases_per_cell < 1 || networks_per_release < 1 ||
      sims_per_scenario < 1) {
    throw std::invalid_argument(
        "releases_per_cell, networks_per_release and sims_per_scenario must "
        "be >= 1");
  }
  if (settings.empty()) throw std::invalid_argument("plan lists no settings");
  std::set<std::string> names;
  for (const auto& s : settings) {
    if (s.name.empty() || s.name.find_first_of(",.\n\"") != std::string::npos) {
      throw std::invalid_argument("bad setting name '" + s.name + "'");
    }
    if (!names.insert(s.name).second) {
      throw std::invalid_argument("setting '" + s.name + "' listed twice");
    }
    s.config.Validate();
  }
  if (degree_bins < 1) throw std::invalid_argument("degree_bins must be >= 1");
  observed.Validate();
  const auto schemas = Schemas(observed);
  auto declared = [&](const std::string& name) {
    return std::any_of(schemas.begin(), schemas.end(),
                       [&](const AttributeSchema& s) { return s.name == name; });
  };
  for (const auto& a : quality_attributes) {
    if (!declared(a)) {
      throw std::invalid_argument("quality attribute '" + a +
                                  "' is not declared");
    }
  }
  if (model_family == ModelFamily::kSbm) {
    if (!declared(sbm_attribute)) {
      throw std::invalid_argument("SBM attribute '" + sbm_attribute +
                                  "' is not declared");
    }
  } else {
    MakeErgmSpec(schemas, ergm_terms).Validate(schemas);
    fit.Validate();
  }
  if (mcmc) mcmc->Validate();
}

ExperimentPlan DefaultPlan() {
  ExperimentPlan plan;
  plan.epsilons = {PrivacyBudget::Finite(0.5), PrivacyBudget::Finite(1),
                   PrivacyBudget::Finite(5), PrivacyBudget::Finite(10),
                   PrivacyBudget::Infinite()};
  plan.delta_caps = {2, 3, 4, 5};
  SimConfig high;
  high.p_inf = 0.75;
  SimConfig low = high;
  low.p_inf = 0.05;
  plan.settings = {{"high", high}, {"low", low}};

  GeneratorConfig& gen = plan.observed;
  gen.node_count = 1000;
  gen.attributes = {
      {{"age", {"15-24", "25-34", "35-44", "45-54", "55-65"}},
       {0.24, 0.22, 0.20, 0.18, 0.16}},
      {{"race", {"Black", "Hispanic", "White"}}, {0.3, 0.2, 0.5}},
  };
  gen.family = ModelFamily::kErgm;
  gen.ergm_spec = MakeErgmSpec(Schemas(gen), plan.ergm_terms);
  // Sparse, assortative ground truth: mean degree near 1, concurrency
  // discouraged, strong age and race homophily.
  gen.ergm_params.theta.assign(gen.ergm_spec.terms.size(), 0.0);
  for (std::size_t t = 0; t < gen.ergm_spec.terms.size(); ++t) {
    const StatKind& kind = gen.ergm_spec.terms[t];
    double& theta = gen.ergm_params.theta[t];
    switch (kind.type) {
      case StatType::kEdges:
        theta = -8.2;
        break;
      case StatType::kMinDegree:
        theta = kind.i == 2 ? -0.9 : -2.5;
        break;
      case StatType::kNodematch:
        theta = 2.4;
        break;
      case StatType::kTotalNodematch:
        theta = 1.2;
        break;
      default:
        break;
    }
  }
  return plan;
}

json ToJson(const GeneratorConfig& config) {
  json attrs = json::array();
  for (const auto& a : config.attributes) {
    attrs.push_back({{"name", a.schema.name},
                     {"categories", a.schema.categories},
                     {"proportions", a.proportions}});
  }
  json j = {{"node_count", config.node_count}, {"attributes", attrs}};
  j["model"] = config.family == ModelFamily::kSbm
                   ? ToJson(config.sbm)
                   : ErgmModelJson(config.ergm_params, config.ergm_spec);
  j["mcmc"] = config.mcmc ? ToJson(*config.mcmc) : json(nullptr);
  return j;
}

GeneratorConfig GeneratorFromJson(const json& j) {
  CheckKeys(j, {"node_count", "attributes", "model", "mcmc"}, "generator");
  GeneratorConfig config;
  config.node_count = j.at("node_count").get<std::size_t>();
  for (const auto& a : j.at("attributes")) {
    CheckKeys(a, {"name", "categories", "proportions"}, "attribute");
    AttributeSpec spec;
    spec.schema.name = a.at("name").get<std::string>();
    spec.schema.categories = a.at("categories").get<std::vector<std::string>>();
    spec.proportions = a.at("proportions").get<std::vector<double>>();
    config.attributes.push_back(std::move(spec));
  }
  const json& model = j.at("model");
  config.family = ParseModelFamily(model.at("family").get<std::string>());
  if (config.family == ModelFamily::kSbm) {
    config.sbm = SbmFromJson(model);
  } else {
    ErgmFromJson(model, config.ergm_spec, config.ergm_params);
  }
  if (j.contains("mcmc") && !j.at("mcmc").is_null()) {
    config.mcmc = McmcFromJson(j.at("mcmc"));
  }
  config.Validate();
  return config;
}

json ToJson(const ExperimentPlan& plan) {
  json eps = json::array();
  for (const auto& e : plan.epsilons) eps.push_back(ToJson(e));
  json settings = json::array();
  for (const auto& s : plan.settings) {
    json cfg = ToJson(s.config);
    cfg.erase("scenario");
    settings.push_back({{"name", s.name}, {"config", cfg}});
  }
  return {{"model_family", std::string(ModelFamilyName(plan.model_family))},
          {"epsilons", eps},
          {"delta_caps", plan.delta_caps},
          {"releases_per_cell", plan.releases_per_cell},
          {"networks_per_release", plan.networks_per_release},
          {"sims_per_scenario", plan.sims_per_scenario},
          {"settings", settings},
          {"master_seed", plan.master_seed},
          {"observed", ToJson(plan.observed)},
          {"sbm_attribute", plan.sbm_attribute},
          {"ergm_terms", ToJson(plan.ergm_terms)},
          {"fit", ToJson(plan.fit)},
          {"mcmc", plan.mcmc ? ToJson(*plan.mcmc) : json(nullptr)},
          {"quality_attributes", plan.quality_attributes},
          {"degree_bins", plan.degree_bins}};
}

ExperimentPlan PlanFromJson(const json& j) {
  CheckKeys(j,
            {"model_family", "epsilons", "delta_caps", "releases_per_cell",
             "networks_per_release", "sims_per_scenario", "settings",
             "master_seed", "observed", "sbm_attribute", "ergm_terms", "fit",
             "mcmc", "quality_attributes", "degree_bins"},
            "plan");
  ExperimentPlan plan = DefaultPlan();
  if (j.contains("model_family")) {
    plan.model_family =
        ParseModelFamily(j.at("model_family").get<std::string>());
  }
  if (j.contains("epsilons")) {
    plan.epsilons.clear();
    for (const auto& e : j.at("epsilons")) {
      plan.epsilons.push_back(BudgetFromJson(e));
    }
  }
  plan.delta_caps = j.value("delta_caps", plan.delta_caps);
  plan.releases_per_cell = j.value("releases_per_cell", plan.releases_per_cell);
  plan.networks_per_release =
      j.value("networks_per_release", plan.networks_per_release);
  plan.sims_per_scenario = j.value("sims_per_scenario", plan.sims_per_scenario);
  if (j.contains("settings")) {
    plan.settings.clear();
    for (const auto& s : j.at("settings")) {
      CheckKeys(s, {"name", "config"}, "setting");
      plan.settings.push_back(
          {s.at("name").get<std::string>(), SimConfigFromJson(s.at("config"))});
    }
  }
  plan.master_seed = j.value("master_seed", plan.master_seed);
  if (j.contains("observed")) {
    plan.observed = GeneratorFromJson(j.at("observed"));
  }
  plan.sbm_attribute = j.value("sbm_attribute", plan.sbm_attribute);
  if (j.contains("ergm_terms")) {
    plan.ergm_terms = TermOptionsFromJson(j.at("ergm_terms"));
  }
  if (j.contains("fit")) plan.fit = FitFromJson(j.at("fit"));
  if (j.contains("mcmc") && !j.at("mcmc").is_null()) {
    plan.mcmc = McmcFromJson(j.at("mcmc"));
  }
  plan.quality_attributes =
      j.value("quality_attributes", plan.quality_attributes);
  plan.degree_bins = j.value("degree_bins", plan.degree_bins);
  plan.Validate();
  return plan;
}

std::vector<StatKind> ReleaseStatisticsFor(const ExperimentPlan& plan,
                                           const AttributedGraph& observed) {
  if (plan.model_family == ModelFamily::kSbm) {
    return SbmStatistics(
        observed.schema(observed.AttributeIndex(plan.sbm_attribute)));
  }
  return MakeErgmSpec(observed.schemas(), plan.ergm_terms).terms;
}

std::size_t ExpectedRowCount(const ExperimentPlan& plan,
                             std::size_t group_count) {
  const std::size_t n = plan.networks_per_release;
  const std::size_t networks =
      1 + n +
      plan.epsilons.size() * plan.delta_caps.size() * plan.releases_per_cell * n;
  const std::size_t per_network =
      (2 + plan.quality_attributes.size()) + (plan.degree_bins + 1) +
      plan.settings.size() * plan.sims_per_scenario * 6 * group_count;
  return networks * per_network;
}

ExperimentReport RunExperiment(const ExperimentPlan& plan, int jobs) {
  plan.Validate();
  Rng observed_rng(DeriveSeed(plan.master_seed, {std::string("observed")}));
  const AttributedGraph observed =
      GenerateObservedNetwork(plan.observed, observed_rng);
  const std::vector<StatKind> kinds = ReleaseStatisticsFor(plan, observed);

  std::vector<Unit> units;
  units.push_back({Condition::kNoDp, std::nullopt, std::nullopt, -1, {}, true});
  for (const auto& eps : plan.epsilons) {
    for (int delta : plan.delta_caps) {
      for (int r = 0; r < plan.releases_per_cell; ++r) {
        units.push_back({Condition::kDp, eps, delta, r, {}, true});
      }
    }
  }
  std::vector<int> fits(units.size(), 0), nonconverged(units.size(), 0);
  ParallelFor(units.size(), jobs, [&](std::size_t i) {
    FitUnit(plan, observed, kinds, units[i], fits[i], nonconverged[i]);
  });

  std::vector<NetworkTask> tasks;
  tasks.push_back({nullptr, -1, &observed});
  for (const auto& u : units) {
    for (std::size_t k = 0; k < u.networks.size(); ++k) {
      tasks.push_back({&u, static_cast<int>(k), &u.networks[k]});
    }
  }
  std::vector<TaskOutput> outputs(tasks.size());
  ParallelFor(tasks.size(), jobs, [&](std::size_t i) {
    RunNetworkTask(plan, observed, tasks[i], outputs[i]);
  });

  std::vector<std::size_t> order(tasks.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return KeyOf(outputs[a].rows.front()) < KeyOf(outputs[b].rows.front());
  });
  ExperimentReport report;
  for (std::size_t i : order) {
    auto& out = outputs[i];
    report.rows.insert(report.rows.end(),
                       std::make_move_iterator(out.rows.begin()),
                       std::make_move_iterator(out.rows.end()));
    report.simulations += out.simulations;
    report.conservation_violations += out.violations;
    report.extinctions += out.extinctions;
  }
  report.fits = std::accumulate(fits.begin(), fits.end(), 0);
  report.nonconverged_fits =
      std::accumulate(nonconverged.begin(), nonconverged.end(), 0);
  return report;
}

std::string ResultsCsv(std::span<const ResultRow> rows) {
  std::string out = std::string(kResultsHeader) + "\n";
  for (const auto& r : rows) {
    out += r.model;
    out += ',';
    out += ConditionName(r.condition);
    out += ',' + EpsilonText(r) + ',' + DeltaText(r) + ',' +
           OptionalInt(r.release) + ',' + OptionalInt(r.network) + ',' +
           OptionalInt(r.sim) + ',' + r.scenario + ',' + r.metric + ',' +
           r.group + ',' + FormatDouble(r.value) + ',' + r.flags + '\n';
  }
  return out;
}

std::vector<ResultRow> ParseResultsCsv(std::string_view text) {
  const CsvTable table = ParseCsv(text, "results");
  std::string header;
  for (const auto& h : table.header) header += (header.empty() ? "" : ",") + h;
  if (header != kResultsHeader) {
    throw std::invalid_argument("results: unexpected header '" + header + "'");
  }
  std::vector<ResultRow> rows;
  rows.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    const auto& f = row.fields;
    const std::string where = "results line " + std::to_string(row.line);
    ResultRow r;
    r.model = f[0];
    if (f[1] == "OBSERVED") {
      r.condition = Condition::kObserved;
    } else if (f[1] == "NO_DP") {
      r.condition = Condition::kNoDp;
    } else if (f[1] == "DP") {
      r.condition = Condition::kDp;
    } else {
      throw std::invalid_argument(where + ": unknown condition '" + f[1] + "'");
    }
    try {
      if (f[2] != "NA") r.epsilon = PrivacyBudget::Parse(f[2]);
      if (f[3] != "NA") r.delta = ParseOptionalInt(f[3], row.line);
      r.value = ParseDouble(f[10]);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(where + ": " + e.what());
    }
    r.release = ParseOptionalInt(f[4], row.line);
    r.network = ParseOptionalInt(f[5], row.line);
    r.sim = ParseOptionalInt(f[6], row.line);
    r.scenario = f[7];
    r.metric = f[8];
    r.group = f[9];
    r.flags = f[11];
    rows.push_back(std::move(r));
  }
  return rows;
}

void ExportResults(std::span<const ResultRow> rows,
                   const std::filesystem::path& path) {
  WriteTextFile(path, ResultsCsv(rows));
}

NestedValues ExtractNested(std::span<const ResultRow> rows,
                           const RowFilter& filter) {
  auto match = [](const std::string& want, const std::string& have) {
    return want.empty() || want == have;
  };
  std::map<std::tuple<int, int, int>, double> cells;
  std::set<int> releases, networks, sims;
  for (const auto& r : rows) {
    if (!match(filter.model, r.model) ||
        !match(filter.condition, std::string(ConditionName(r.condition))) ||
        !match(filter.epsilon, EpsilonText(r)) ||
        !match(filter.delta, DeltaText(r)) ||
        !match(filter.scenario, r.scenario) ||
        !match(filter.metric, r.metric) || !match(filter.group, r.group)) {
      continue;
    }
    if (!cells.emplace(std::make_tuple(r.release, r.network, r.sim), r.value)
             .second) {
      throw std::invalid_argument(
          "selection is ambiguous: several rows share release " +
          OptionalInt(r.release) + ", network " + OptionalInt(r.network) +
          ", sim " + OptionalInt(r.sim) + "; narrow the filter");
    }
    if (std::isnan(r.value)) {
      throw std::invalid_argument("selection contains missing values");
    }
    releases.insert(r.release);
    networks.insert(r.network);
    sims.insert(r.sim);
  }
  if (cells.empty()) throw std::invalid_argument("selection matches no rows");
  NestedValues out;
  out.releases = static_cast<int>(releases.size());
  out.networks = static_cast<int>(networks.size());
  out.sims = static_cast<int>(sims.size());
  for (int i : releases) {
    for (int j : networks) {
      for (int k : sims) {
        auto it = cells.find({i, j, k});
        if (it == cells.end()) {
          throw std::invalid_argument(
              "unbalanced design: no value for release " + OptionalInt(i) +
              ", network " + OptionalInt(j) + ", sim " + OptionalInt(k));
        }
        out.values.push_back(it->second);
      }
    }
  }
  return out;
}

std::vector<std::string> PlotKinds() {
  return {"prevalence_ratio", "groups", "epidemic",
          "quality",          "degree", "variance"};
}

std::string PlotDataCsv(std::span<const ResultRow> rows,
                        std::string_view kind) {
  if (kind == "prevalence_ratio") {
    return AggregateCsv(rows, [](const ResultRow& r) {
      return r.metric == "prevalence_ratio" && r.group == "ALL";
    });
  }
  if (kind == "groups") {
    return AggregateCsv(rows, [](const ResultRow& r) {
      return r.metric == "prevalence_ratio" ||
             r.metric == "incidence_rate_ratio";
    });
  }
  if (kind == "epidemic") {
    return AggregateCsv(rows, [](const ResultRow& r) {
      return r.metric == "prevalence" || r.metric == "incidence_rate";
    });
  }
  if (kind == "quality") {
    return AggregateCsv(rows, [](const ResultRow& r) {
      return r.metric.starts_with("quality_");
    });
  }
  if (kind == "degree") {
    return AggregateCsv(
        rows, [](const ResultRow& r) { return r.metric == "degree_count"; });
  }
  if (kind == "variance") return VarianceCsv(rows);
  throw std::invalid_argument("unknown plot kind '" + std::string(kind) + "'");
}

}  // namespace epidp
