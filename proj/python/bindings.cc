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

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "epidp/anova.h"
#include "epidp/dp_release.h"
#include "epidp/epidemic.h"
#include "epidp/ergm.h"
#include "epidp/experiment.h"
#include "epidp/graph.h"
#include "epidp/random.h"
#include "epidp/sbm.h"
#include "epidp/statistics.h"

namespace py = pybind11;
using namespace epidp;

namespace {

// Structured values cross the boundary as JSON text; the Python side parses
// them with the json module.
std::string Dump(const nlohmann::json& j) { return j.dump(); }

std::vector<StatKind> ParseKinds(const std::vector<std::string>& text) {
  std::vector<StatKind> kinds;
  for (const auto& t : text) kinds.push_back(StatKind::Parse(t));
  return kinds;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Node-DP network release, synthetic networks and SIS simulation";
  m.attr("__version__") = "1.0.0";

  py::class_<AttributedGraph>(m, "Graph")
      .def_static(
          "from_csv",
          [](const std::string& nodes, const std::string& edges) {
            return ParseGraph(nodes, edges);
          },
          py::arg("nodes_csv"), py::arg("edges_csv"))
      .def_static(
          "load",
          [](const std::string& nodes, const std::string& edges) {
            return LoadGraph(nodes, edges);
          },
          py::arg("nodes_path"), py::arg("edges_path"))
      .def_property_readonly("node_count", &AttributedGraph::node_count)
      .def_property_readonly("edge_count", &AttributedGraph::edge_count)
      .def_property_readonly("max_degree", &AttributedGraph::max_degree)
      .def("edges",
           [](const AttributedGraph& g) {
             std::vector<std::pair<NodeId, NodeId>> out;
             for (const Edge& e : g.edges()) out.emplace_back(e.u, e.v);
             return out;
           })
      .def("categories",
           [](const AttributedGraph& g, const std::string& attr) {
             return g.schema(g.AttributeIndex(attr)).categories;
           })
      .def("nodes_csv", [](const AttributedGraph& g) { return NodesCsv(g); })
      .def("edges_csv", [](const AttributedGraph& g) { return EdgesCsv(g); })
      .def("__repr__", [](const AttributedGraph& g) {
        return "<Graph nodes=" + std::to_string(g.node_count()) +
               " edges=" + std::to_string(g.edge_count()) + ">";
      });

  m.def("statistic",
        [](const AttributedGraph& g, const std::string& kind) {
          return ComputeStatistic(g, StatKind::Parse(kind));
        },
        py::arg("graph"), py::arg("kind"));
  m.def("mixing_matrix",
        [](const AttributedGraph& g, const std::string& attr) {
          return Eigen::MatrixXd(MixingMatrix(g, attr).cast<double>());
        },
        py::arg("graph"), py::arg("attr"));
  m.def("degree_histogram", &DegreeHistogram, py::arg("graph"));
  m.def("truncate_degree", &TruncateDegree, py::arg("graph"),
        py::arg("delta_cap"));
  m.def("global_sensitivity",
        [](const std::string& kind, int delta_cap) {
          return GlobalSensitivity(StatKind::Parse(kind), delta_cap);
        },
        py::arg("kind"), py::arg("delta_cap"));

  m.def("release",
        [](const AttributedGraph& g, const std::vector<std::string>& kinds,
           const std::string& epsilon, int delta_cap, std::uint64_t seed) {
          ReleaseSpec spec{ParseKinds(kinds), PrivacyBudget::Parse(epsilon),
                           delta_cap};
          Rng rng(seed);
          return Dump(ToJson(ReleaseStatistics(g, spec, rng)));
        },
        py::arg("graph"), py::arg("kinds"), py::arg("epsilon"),
        py::arg("delta_cap"), py::arg("seed"),
        "Noisy release as a JSON document. epsilon is a number or \"inf\".");

  m.def("fit_sbm",
        [](const AttributedGraph& g, const std::string& attr) {
          const std::size_t a = g.AttributeIndex(attr);
          return FitSbm(MixingMatrix(g, attr).cast<double>(), attr,
                        g.GroupSizes(a))
              .edge_prob;
        },
        py::arg("graph"), py::arg("attr"));
  m.def("sample_sbm",
        [](const AttributedGraph& population, const std::string& attr,
           const Eigen::MatrixXd& edge_prob, std::uint64_t seed) {
          Rng rng(seed);
          return SampleSbm({attr, edge_prob}, population, rng);
        },
        py::arg("population"), py::arg("attr"), py::arg("edge_prob"),
        py::arg("seed"));

  m.def("ergm_statistics",
        [](const AttributedGraph& g, const std::vector<std::string>& terms) {
          return ErgmStatistics(g, ErgmSpec{ParseKinds(terms)});
        },
        py::arg("graph"), py::arg("terms"));

  m.def("simulate",
        [](const AttributedGraph& g, const std::string& config_json,
           std::uint64_t seed) {
          const SimConfig cfg =
              SimConfigFromJson(nlohmann::json::parse(config_json));
          Rng rng(seed);
          const EpidemicSummary s = Summarize(RunSis(g, cfg, rng), cfg);
          py::dict out;
          for (std::size_t k = 0; k < s.groups.size(); ++k) {
            out[py::str(s.groups[k])] =
                py::make_tuple(s.prevalence[k], s.incidence[k]);
          }
          return out;
        },
        py::arg("graph"), py::arg("config_json"), py::arg("seed"),
        "Maps each group to (mean prevalence, mean incidence rate).");

  m.def("decompose_variance",
        [](const std::vector<double>& values, int releases, int networks,
           int sims) {
          const VarianceDecomposition v =
              DecomposeVariance(values, releases, networks, sims);
          py::list rows;
          for (const auto& s : v.sources) {
            rows.append(py::make_tuple(s.source, s.df, s.ss, s.ms, s.var_pct));
          }
          return rows;
        },
        py::arg("values"), py::arg("releases"), py::arg("networks"),
        py::arg("sims"));

  m.def("default_plan", [] { return Dump(ToJson(DefaultPlan())); });
  m.def("run_experiment",
        [](const std::string& plan_json, int jobs) {
          const ExperimentPlan plan =
              PlanFromJson(nlohmann::json::parse(plan_json));
          ExperimentReport report;
          {
            py::gil_scoped_release release;
            report = RunExperiment(plan, jobs);
          }
          return ResultsCsv(report.rows);
        },
        py::arg("plan_json"), py::arg("jobs") = 1,
        "Runs the sweep and returns the results CSV text.");
  m.def("plot_data",
        [](const std::string& results_csv, const std::string& kind) {
          return PlotDataCsv(ParseResultsCsv(results_csv), kind);
        },
        py::arg("results_csv"), py::arg("kind"));
  m.def("derive_seed",
        [](std::uint64_t master, const std::vector<std::string>& path) {
          std::vector<SeedPart> parts(path.begin(), path.end());
          return DeriveSeed(master, parts);
        },
        py::arg("master"), py::arg("path"));
}
