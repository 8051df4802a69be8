// Copyright 2026 The hetsched Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hetsched/model.hpp"

namespace hetsched {

/// The 10-task, 15-edge reference DAG from the original HEFT publication with its
/// 3-PE execution-time table. Power is not part of the reference; every
/// supported entry draws 1 W.
inline AppDag canonical_dag() {
  struct Row {
    int id;
    Time p0, p1, p2;
  };
  static constexpr Row kRows[] = {
      {1, 14, 16, 9}, {2, 13, 19, 18}, {3, 11, 13, 19}, {4, 13, 8, 17}, {5, 12, 13, 10},
      {6, 13, 16, 9}, {7, 7, 15, 11},  {8, 5, 11, 14},  {9, 18, 12, 20}, {10, 21, 7, 16},
  };
  std::vector<TaskNode> tasks;
  for (const Row& r : kRows) {
    TaskNode t;
    t.id = r.id;
    t.name = "T" + std::to_string(r.id);
    t.exec_time = {r.p0, r.p1, r.p2};
    t.power = {1.0, 1.0, 1.0};
    tasks.push_back(std::move(t));
  }
  std::vector<Edge> edges = {
      {1, 2, 18}, {1, 3, 12}, {1, 4, 9},  {1, 5, 11}, {1, 6, 14},
      {2, 8, 19}, {2, 9, 16}, {3, 7, 23}, {4, 8, 27}, {4, 9, 23},
      {5, 9, 13}, {6, 8, 15}, {7, 10, 17}, {8, 10, 11}, {9, 10, 13},
  };
  return AppDag("canonical", std::move(tasks), std::move(edges));
}

/// Three CPUs P0..P2 with unit bandwidth between distinct PEs.
inline Platform canonical_platform() {
  std::vector<ProcessingElement> pes;
  for (int k = 0; k < 3; ++k) pes.push_back({k, "P" + std::to_string(k), PeKind::cpu, 0.0});
  return Platform::uniform("canonical-3pe", std::move(pes), 1.0);
}

}  // namespace hetsched
