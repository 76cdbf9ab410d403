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

#ifndef EPIDP_ANOVA_H_
#define EPIDP_ANOVA_H_

#include <array>
#include <span>
#include <string>

namespace epidp {

struct VarianceSource {
  std::string source;
  long df = 0;
  double ss = 0;
  double ms = 0;       // ss / df; NaN when df == 0
  double var_pct = 0;  // 100 * ss / ss_total; NaN when ss_total == 0
};

// Balanced three-level nested design: releases > networks > simulations.
struct VarianceDecomposition {
  std::array<VarianceSource, 3> sources;  // release, network, simulation
  double ss_total = 0;
  double grand_mean = 0;
};

// `values` is indexed [release][network][simulation], flattened row-major,
// and must hold exactly releases * networks * sims entries. Degrees of
// freedom are R-1, R(N-1) and RN(M-1).
VarianceDecomposition DecomposeVariance(std::span<const double> values,
                                        int releases, int networks, int sims);

// CSV with header `source,df,ss,ms,var_pct`.
std::string VarianceTableCsv(const VarianceDecomposition& v);

}  // namespace epidp

#endif  // EPIDP_ANOVA_H_
