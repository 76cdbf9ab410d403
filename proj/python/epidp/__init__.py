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

"""Python bindings for the epidp C++ library."""

import json

from ._core import (
    Graph,
    __version__,
    decompose_variance,
    default_plan,
    degree_histogram,
    derive_seed,
    ergm_statistics,
    fit_sbm,
    global_sensitivity,
    mixing_matrix,
    plot_data,
    run_experiment,
    sample_sbm,
    simulate,
    statistic,
    truncate_degree,
)
from ._core import release as _release


def release(graph, kinds, epsilon, delta_cap, seed):
    """Node-DP release of `kinds`; returns the release document as a dict."""
    return json.loads(_release(graph, list(kinds), str(epsilon), delta_cap, seed))


__all__ = [
    "Graph",
    "__version__",
    "decompose_variance",
    "default_plan",
    "degree_histogram",
    "derive_seed",
    "ergm_statistics",
    "fit_sbm",
    "global_sensitivity",
    "mixing_matrix",
    "plot_data",
    "release",
    "run_experiment",
    "sample_sbm",
    "simulate",
    "statistic",
    "truncate_degree",
]
