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

#ifndef EPIDP_CSV_H_
#define EPIDP_CSV_H_

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace epidp {

// Plain comma-separated text: no quoting, LF or CRLF line endings, blank
// lines ignored.
struct CsvRow {
  std::size_t line = 0;  // 1-based line number in the source
  std::vector<std::string> fields;
};

struct CsvTable {
  std::string source;  // file name used in error messages
  std::vector<std::string> header;
  std::vector<CsvRow> rows;

  // Column index of `name`; throws std::runtime_error naming the source.
  std::size_t Column(std::string_view name) const;
  bool HasColumn(std::string_view name) const;
};

CsvTable ParseCsv(std::string_view text, std::string source);

std::string ReadTextFile(const std::filesystem::path& path);
// Throws std::runtime_error when the file cannot be written.
void WriteTextFile(const std::filesystem::path& path, std::string_view text);

// Shortest round-tripping decimal form of `x`; "NA" for NaN, "inf"/"-inf".
std::string FormatDouble(double x);
// Inverse of FormatDouble. Throws std::invalid_argument on junk.
double ParseDouble(std::string_view text);

}  // namespace epidp

#endif  // EPIDP_CSV_H_
