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

#ifndef EPIDP_TESTS_FIXTURES_H_
#define EPIDP_TESTS_FIXTURES_H_

#include <string>

#include "epidp/graph.h"

namespace fixture {

// Seven-node shape example: A, B, C circles; D, E squares; F, G diamonds.
inline const char* kShapeNodes =
    "node_id,shape\n"
    "A,circle\nB,circle\nC,circle\nD,square\nE,square\nF,diamond\nG,diamond\n";
inline const char* kShapeEdges =
    "u,v\nA,B\nA,C\nB,D\nC,E\nD,E\nE,G\nD,F\nF,G\n";

inline epidp::AttributedGraph ShapeGraph() {
  return epidp::ParseGraph(kShapeNodes, kShapeEdges);
}

}  // namespace fixture

#endif  // EPIDP_TESTS_FIXTURES_H_
