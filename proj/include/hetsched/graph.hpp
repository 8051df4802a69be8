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

#include <cstddef>
#include <functional>
#include <optional>
#include <queue>
#include <span>
#include <utility>
#include <vector>

namespace hetsched::graph {

using Arc = std::pair<std::size_t, std::size_t>;

/// Kahn's algorithm over nodes [0, n). Among simultaneously available nodes
/// the smallest index is emitted first, so the order is deterministic.
/// Returns std::nullopt when the arcs contain a cycle.
inline std::optional<std::vector<std::size_t>> topological_order(std::size_t n,
                                                                 std::span<const Arc> arcs) {
  std::vector<std::vector<std::size_t>> out(n);
  std::vector<std::size_t> indegree(n, 0);
  for (auto [from, to] : arcs) {
    out[from].push_back(to);
    ++indegree[to];
  }
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> avail;
  for (std::size_t v = 0; v < n; ++v) {
    if (indegree[v] == 0) avail.push(v);
  }
  std::vector<std::size_t> order;
  order.reserve(n);
  while (!avail.empty()) {
    std::size_t v = avail.top();
    avail.pop();
    order.push_back(v);
    for (std::size_t w : out[v]) {
      if (--indegree[w] == 0) avail.push(w);
    }
  }
  if (order.size() != n) return std::nullopt;
  return order;
}

/// Nodes that lie on, or downstream of, a cycle: whatever Kahn's algorithm
/// could not emit.
inline std::vector<std::size_t> cyclic_residue(std::size_t n, std::span<const Arc> arcs) {
  std::vector<std::size_t> indegree(n, 0);
  std::vector<std::vector<std::size_t>> out(n);
  for (auto [from, to] : arcs) {
    out[from].push_back(to);
    ++indegree[to];
  }
  std::vector<std::size_t> stack;
  for (std::size_t v = 0; v < n; ++v) {
    if (indegree[v] == 0) stack.push_back(v);
  }
  std::vector<bool> emitted(n, false);
  while (!stack.empty()) {
    std::size_t v = stack.back();
    stack.pop_back();
    emitted[v] = true;
    for (std::size_t w : out[v]) {
      if (--indegree[w] == 0) stack.push_back(w);
    }
  }
  std::vector<std::size_t> residue;
  for (std::size_t v = 0; v < n; ++v) {
    if (!emitted[v]) residue.push_back(v);
  }
  return residue;
}

}  // namespace hetsched::graph
