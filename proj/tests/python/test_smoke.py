# Copyright 2026 The epidp Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import json
import math

import numpy as np
import pytest

import epidp

NODES = "node_id,shape\nA,circle\nB,circle\nC,circle\nD,square\nE,square\nF,diamond\nG,diamond\n"
EDGES = "u,v\nA,B\nA,C\nB,D\nC,E\nD,E\nE,G\nD,F\nF,G\n"


@pytest.fixture
def shapes():
    return epidp.Graph.from_csv(NODES, EDGES)


def test_graph_basics(shapes):
    assert shapes.node_count == 7
    assert shapes.edge_count == 8
    assert shapes.categories("shape") == ["circle", "square", "diamond"]
    assert epidp.degree_histogram(shapes) == [0, 0, 5, 2]


def test_mixing_and_sbm(shapes):
    m = epidp.mixing_matrix(shapes, "shape")
    np.testing.assert_array_equal(m, [[2, 2, 0], [2, 1, 2], [0, 2, 1]])
    p = epidp.fit_sbm(shapes, "shape")
    np.testing.assert_allclose(p, [[2 / 3, 1 / 3, 0], [1 / 3, 1, 0.5], [0, 0.5, 1]])
    g = epidp.sample_sbm(shapes, "shape", p, 3)
    assert g.node_count == 7


def test_release(shapes):
    exact = epidp.release(shapes, ["edges", "nodefactor(shape,1)"], "inf", 3, 1)
    assert [s["value"] for s in exact["statistics"]] == [8, 5]
    noisy = epidp.release(shapes, ["edges"], 1.0, 3, 1)
    again = epidp.release(shapes, ["edges"], 1.0, 3, 1)
    assert noisy["statistics"][0]["value"] == again["statistics"][0]["value"]
    assert epidp.global_sensitivity("nodefactor(shape,0)", 4) == 8
    with pytest.raises(ValueError):
        epidp.release(shapes, ["edges"], 0, 3, 1)


def test_truncation(shapes):
    t = epidp.truncate_degree(shapes, 2)
    assert t.max_degree <= 2
    assert set(t.edges()) <= set(shapes.edges())


def test_simulate(shapes):
    cfg = json.dumps({"burn_in": 10, "analytic_window": 5, "initial_prevalence": 0.3})
    out = epidp.simulate(shapes, cfg, 7)
    assert set(out) == {"ALL", "shape:circle", "shape:square", "shape:diamond"}
    prev, inc = out["ALL"]
    assert 0.0 <= prev <= 1.0 and 0.0 <= inc <= 1.0


def test_variance():
    rows = epidp.decompose_variance([0, 0, 0, 0, 1, 1, 1, 1], 2, 2, 2)
    assert [r[2] for r in rows] == [2.0, 0.0, 0.0]
    assert [r[1] for r in rows] == [1, 2, 4]


def test_tiny_experiment():
    plan = json.loads(epidp.default_plan())
    plan.update(
        model_family="sbm",
        epsilons=[5],
        delta_caps=[3],
        releases_per_cell=1,
        networks_per_release=1,
        sims_per_scenario=1,
    )
    plan["observed"]["node_count"] = 80
    plan["settings"] = plan["settings"][:1]
    plan["settings"][0]["config"].update(burn_in=5, analytic_window=5)
    csv = epidp.run_experiment(json.dumps(plan), 1)
    assert csv == epidp.run_experiment(json.dumps(plan), 2)
    header = csv.splitlines()[0]
    assert header.startswith("model,condition,epsilon,delta")
    table = epidp.plot_data(csv, "prevalence_ratio")
    assert table.splitlines()[0].startswith("model,condition")
    prevalence = [
        float(line.split(",")[10])
        for line in csv.splitlines()[1:]
        if ",prevalence,ALL," in line
    ]
    assert prevalence and all(not math.isnan(x) for x in prevalence)


def test_seeds():
    assert epidp.derive_seed(1, ["a", "b"]) == epidp.derive_seed(1, ["a", "b"])
    assert epidp.derive_seed(1, ["a", "b"]) != epidp.derive_seed(1, ["b", "a"])
