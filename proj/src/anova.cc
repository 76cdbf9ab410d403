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

#include "epidp/anova.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "epidp/csv.h"

namespace epidp {

VarianceDecomposition DecomposeVariance(std::span<const double> values,
                                        int releases, int networks, int sims) {
  if (releases < 1 || networks < 1 || sims < 1) {
    throw std::invalid_argument("design sizes must be >= 1");
  }
  const std::size_t r = releases, n = networks, m = sims;
  if (values.size() != r * n * m) {
    throw std::invalid_argument(
        "unbalanced design: expected " + std::to_string(r * n * m) +
        " values, got " + std::to_string(values.size()));
  }
  auto at = [&](std::size_t i, std::size_t j, std::size_t k) {
    return values[(i * n + j) * m + k];
  };

  double grand = 0;
  for (double y : values) grand += y;
  grand /= static_cast<double>(values.size());

  std::vector<double> release_mean(r, 0.0);
  std::vector<double> network_mean(r * n, 0.0);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double sum = 0;
      for (std::size_t k = 0; k < m; ++k) sum += at(i, j, k);
      network_mean[i * n + j] = sum / static_cast<double>(m);
      release_mean[i] += network_mean[i * n + j];
    }
    release_mean[i] /= static_cast<double>(n);
  }

  VarianceDecomposition out;
  out.grand_mean = grand;
  double ss_total = 0;
  for (double y : values) ss_total += (y - grand) * (y - grand);
  double ss_release = 0;
  for (double mu : release_mean) ss_release += (mu - grand) * (mu - grand);
  ss_release *= static_cast<double>(n * m);
  double ss_network = 0;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double d = network_mean[i * n + j] - release_mean[i];
      ss_network += d * d;
    }
  }
  ss_network *= static_cast<double>(m);
  // Within-network sum computed directly rather than by subtraction so it
  // cannot go negative through rounding.
  double ss_error = 0;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < m; ++k) {
        const double d = at(i, j, k) - network_mean[i * n + j];
        ss_error += d * d;
      }
    }
  }
  out.ss_total = ss_total;

  const long df[3] = {static_cast<long>(r) - 1,
                      static_cast<long>(r * (n - 1)),
                      static_cast<long>(r * n * (m - 1))};
  const double ss[3] = {ss_release, ss_network, ss_error};
  const char* names[3] = {"Release", "Network:Release",
                          "Simulation:Network:Release"};
  for (int s = 0; s < 3; ++s) {
    VarianceSource& src = out.sources[s];
    src.source = names[s];
    src.df = df[s];
    src.ss = ss[s];
    src.ms = df[s] > 0 ? ss[s] / static_cast<double>(df[s]) : std::nan("");
    src.var_pct = ss_total > 0 ? 100.0 * ss[s] / ss_total : std::nan("");
  }
  return out;
}

std::string VarianceTableCsv(const VarianceDecomposition& v) {
  std::string out = "source,df,ss,ms,var_pct\n";
  for (const auto& s : v.sources) {
    out += s.source + "," + std::to_string(s.df) + "," + FormatDouble(s.ss) +
           "," + FormatDouble(s.ms) + "," + FormatDouble(s.var_pct) + "\n";
  }
  return out;
}

}  // namespace epidp
