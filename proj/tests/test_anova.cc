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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "epidp/anova.h"
#include "oracles.h"

using namespace epidp;

TEST_CASE("hand-computable two by two by two") {
  // Release means 0 and 1, no spread below the release level.
  const std::vector<double> y = {0, 0, 0, 0, 1, 1, 1, 1};
  const VarianceDecomposition v = DecomposeVariance(y, 2, 2, 2);
  CHECK(v.sources[0].ss == 2.0);
  CHECK(v.sources[1].ss == 0.0);
  CHECK(v.sources[2].ss == 0.0);
  CHECK(v.sources[0].var_pct == doctest::Approx(100.0));
  CHECK(v.grand_mean == 0.5);
  CHECK(v.sources[0].df == 1);
  CHECK(v.sources[1].df == 2);
  CHECK(v.sources[2].df == 4);
}

TEST_CASE("decomposition matches correction-term formulas") {
  std::mt19937 gen(5);
  std::normal_distribution<double> z(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int r = 2 + trial % 4, n = 2 + trial % 3, m = 2 + trial % 5;
    std::vector<double> y(r * n * m);
    for (double& v : y) v = 0.1 + 0.02 * z(gen);
    const oracle::NestedSs want = oracle::NestedAnova(y, r, n, m);
    const VarianceDecomposition got = DecomposeVariance(y, r, n, m);
    CHECK(got.sources[0].ss == doctest::Approx(want.release).epsilon(1e-6));
    CHECK(got.sources[1].ss == doctest::Approx(want.network).epsilon(1e-6));
    CHECK(got.sources[2].ss == doctest::Approx(want.error).epsilon(1e-6));
    const double sum = got.sources[0].ss + got.sources[1].ss + got.sources[2].ss;
    CHECK(std::abs(sum - got.ss_total) <= 1e-9 * got.ss_total);
    double pct = 0;
    for (const auto& s : got.sources) pct += s.var_pct;
    CHECK(pct == doctest::Approx(100.0));
  }
}

TEST_CASE("degrees of freedom") {
  const std::vector<double> y(5 * 40 * 10, 1.0);
  const VarianceDecomposition v = DecomposeVariance(y, 5, 40, 10);
  CHECK(v.sources[0].df == 4);
  CHECK(v.sources[1].df == 195);
  CHECK(v.sources[2].df == 1800);
  CHECK(v.ss_total == 0.0);
  CHECK(std::isnan(v.sources[0].var_pct));
}

TEST_CASE("single level designs and shape errors") {
  const std::vector<double> y = {1, 2, 3};
  const VarianceDecomposition v = DecomposeVariance(y, 1, 1, 3);
  CHECK(v.sources[0].df == 0);
  CHECK(std::isnan(v.sources[0].ms));
  CHECK(v.sources[2].ss == doctest::Approx(2.0));
  CHECK_THROWS_AS(DecomposeVariance(y, 2, 1, 2), std::invalid_argument);
  CHECK_THROWS_AS(DecomposeVariance(y, 0, 1, 3), std::invalid_argument);
}

TEST_CASE("table csv") {
  const std::vector<double> y = {0, 0, 0, 0, 2, 2, 2, 2};
  const std::string csv = VarianceTableCsv(DecomposeVariance(y, 2, 2, 2));
  CHECK(csv.rfind("source,df,ss,ms,var_pct\nRelease,1,8,8,100\n", 0) == 0);
}
