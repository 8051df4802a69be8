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

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hetsched/graph.hpp"
#include "hetsched/model.hpp"

namespace hetsched {

/// Two ranks closer than this are a tie.
inline constexpr double kRankTolerance = 1e-9;

/// Slack allowed when comparing schedule times.
inline bool time_less(Time a, Time b) {
  return a < b - 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

/// A task of a particular DAG instance (frame). `task` indexes AppDag::tasks().
struct TaskKey {
  int instance = 0;
  std::size_t task = 0;

  auto operator<=>(const TaskKey&) const = default;
};

inline std::string to_string(const TaskKey& k) {
  return std::to_string(k.instance) + ":" + std::to_string(k.task);
}

struct Placement {
  std::size_t pe = 0;
  Time start = 0.0;
  Time end = 0.0;
};

struct Assignment {
  TaskKey key;
  std::size_t pe = 0;
  Time start = 0.0;
  Time end = 0.0;

  [[nodiscard]] Placement placement() const { return {pe, start, end}; }
};

/// Scheduler output: one assignment per scheduled task plus the ordering
/// edges the runtime must honour in addition to the DAG edges.
struct ScheduleTable {
  std::map<TaskKey, Assignment> assignments;
  std::set<std::pair<TaskKey, TaskKey>> dynamic_deps;

  void add(const Assignment& a) { assignments[a.key] = a; }

  /// Latest end minus earliest start; 0 for an empty table.
  [[nodiscard]] Time makespan() const {
    if (assignments.empty()) return 0.0;
    Time lo = std::numeric_limits<Time>::infinity();
    Time hi = -std::numeric_limits<Time>::infinity();
    for (const auto& [key, a] : assignments) {
      lo = std::min(lo, a.start);
      hi = std::max(hi, a.end);
    }
    return hi - lo;
  }
};

struct BusyInterval {
  Time start = 0.0;
  Time end = 0.0;
  TaskKey key;
};

/// Sorted, non-overlapping busy intervals of one PE.
class PeTimeline {
 public:
  PeTimeline() = default;
  explicit PeTimeline(std::size_t pe) : pe_(pe) {}

  [[nodiscard]] std::size_t pe() const { return pe_; }
  [[nodiscard]] std::span<const BusyInterval> busy() const { return busy_; }
  [[nodiscard]] bool empty() const { return busy_.empty(); }

  [[nodiscard]] Time last_end() const { return busy_.empty() ? 0.0 : busy_.back().end; }

  /// Inserts in start order. Zero-length intervals occupy nothing and are
  /// dropped. Throws std::logic_error on overlap.
  void insert(const BusyInterval& iv) {
    if (!(iv.end > iv.start)) return;
    auto it = std::upper_bound(busy_.begin(), busy_.end(), iv.start,
                               [](Time t, const BusyInterval& b) { return t < b.start; });
    if (it != busy_.end() && time_less(it->start, iv.end)) {
      throw std::logic_error("PE " + std::to_string(pe_) + ": interval overlaps successor");
    }
    if (it != busy_.begin() && time_less(iv.start, std::prev(it)->end)) {
      throw std::logic_error("PE " + std::to_string(pe_) + ": interval overlaps predecessor");
    }
    busy_.insert(it, iv);
  }

 private:
  std::size_t pe_ = 0;
  std::vector<BusyInterval> busy_;
};

struct Slot {
  Time start = 0.0;
  Time end = 0.0;
};

/// Insertion-based slot search: the earliest start >= ready at which `exec`
/// time-units fit into an idle gap or after the last busy interval. Candidate
/// starts are the ready time and the ends of busy intervals.
inline Slot eft_insertion(Time exec, const PeTimeline& timeline, Time ready) {
  Time cursor = ready;
  for (const BusyInterval& b : timeline.busy()) {
    if (b.end <= cursor) continue;
    if (b.start >= cursor + exec) break;
    cursor = b.end;
  }
  return {cursor, cursor + exec};
}

inline Slot eft_insertion(const TaskNode& task, std::size_t pe, const PeTimeline& timeline,
                          Time ready) {
  if (!task.supports(pe)) {
    throw ModelError("task " + std::to_string(task.id) + " is not supported on PE " +
                     std::to_string(pe));
  }
  return eft_insertion(task.exec_on(pe), timeline, ready);
}

/// Upward-rank recursion with a caller-chosen node weight:
///   rank(i) = weight(i) + max over successors j of (avg_comm(i,j) + rank(j)).
template <class NodeWeight>
std::vector<double> upward_rank_with(const AppDag& dag, const Platform& platform,
                                     NodeWeight&& weight) {
  std::vector<double> rank(dag.size(), 0.0);
  auto order = dag.topological_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    std::size_t i = *it;
    double tail = 0.0;
    for (const Link& s : dag.successors(i)) {
      tail = std::max(tail, avg_comm_cost(s.volume, platform) + rank[s.task]);
    }
    rank[i] = weight(dag.task(i)) + tail;
  }
  return rank;
}

/// Standard HEFT upward rank, indexed like AppDag::tasks().
inline std::vector<double> upward_rank(const AppDag& dag, const Platform& platform) {
  return upward_rank_with(dag, platform, [](const TaskNode& t) { return mean_exec_time(t); });
}

/// Energy-delay variant: node weight mean_exec^2 * mean_power.
inline std::vector<double> upward_rank_edp(const AppDag& dag, const Platform& platform) {
  return upward_rank_with(dag, platform, [](const TaskNode& t) {
    double w = mean_exec_time(t);
    return w * w * mean_power(t);
  });
}

/// Sort key for list scheduling: non-increasing rank, then smaller task id,
/// then smaller instance id.
struct RankKey {
  double rank = 0.0;
  int task_id = 0;
  int instance = 0;
};

inline bool rank_before(const RankKey& a, const RankKey& b) {
  if (std::abs(a.rank - b.rank) > kRankTolerance) return a.rank > b.rank;
  if (a.task_id != b.task_id) return a.task_id < b.task_id;
  return a.instance < b.instance;
}

/// Indices of `keys` in list-scheduling priority order.
inline std::vector<std::size_t> priority_order(std::span<const RankKey> keys) {
  std::vector<std::size_t> idx(keys.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return rank_before(keys[a], keys[b]); });
  return idx;
}

/// Data-arrival time of `task` on `pe`: the latest parent finish plus its
/// transfer time, never earlier than `now`. `parent_of(j)` returns the
/// placement of predecessor j; a missing parent is an error.
template <class ParentLookup>
Time earliest_start(const AppDag& dag, std::size_t task, std::size_t pe, const Platform& platform,
                    ParentLookup&& parent_of, Time now) {
  Time ready = now;
  for (const Link& p : dag.predecessors(task)) {
    std::optional<Placement> parent = parent_of(p.task);
    if (!parent) {
      throw std::logic_error("earliest_start: no finish time for parent task " +
                             std::to_string(dag.task(p.task).id) + " of task " +
                             std::to_string(dag.task(task).id));
    }
    ready = std::max(ready, parent->end + platform.comm_time(p.volume, parent->pe, pe));
  }
  return ready;
}

/// A (possibly partial) DAG instance as seen by a scheduler. Tasks with a
/// `fixed` placement are running or done and are not to be scheduled; their
/// placements still gate successors through data arrival.
struct DagInstance {
  int instance = 0;
  const AppDag* dag = nullptr;
  std::vector<std::optional<Placement>> fixed;

  [[nodiscard]] bool pending(std::size_t t) const {
    return fixed.empty() || !fixed[t].has_value();
  }
  [[nodiscard]] std::size_t pending_count() const {
    std::size_t n = 0;
    for (std::size_t t = 0; t < dag->size(); ++t) n += pending(t) ? 1 : 0;
    return n;
  }
};

struct Violation {
  enum class Kind {
    unknown_task,
    missing_assignment,
    unsupported_pe,
    bad_duration,
    before_now,
    overlap,
    precedence,
    dependency_cycle,
  };
  Kind kind;
  std::string message;
};

inline std::string_view to_string(Violation::Kind k) {
  switch (k) {
    case Violation::Kind::unknown_task: return "unknown_task";
    case Violation::Kind::missing_assignment: return "missing_assignment";
    case Violation::Kind::unsupported_pe: return "unsupported_pe";
    case Violation::Kind::bad_duration: return "bad_duration";
    case Violation::Kind::before_now: return "before_now";
    case Violation::Kind::overlap: return "overlap";
    case Violation::Kind::precedence: return "precedence";
    case Violation::Kind::dependency_cycle: return "dependency_cycle";
  }
  return "?";
}

/// Checks a schedule against the constraints of the interval model: one
/// assignment per pending task on a supporting PE with the right length;
/// per-PE non-overlap including `running`; data-arrival precedence on every
/// edge; acyclic DAG edges plus dynamic dependencies. Returns all violations.
inline std::vector<Violation> validate_schedule(const ScheduleTable& table,
                                                std::span<const DagInstance> dags,
                                                const Platform& platform,
                                                std::span<const Assignment> running,
                                                Time now = -std::numeric_limits<Time>::infinity()) {
  using K = Violation::Kind;
  std::vector<Violation> out;
  std::map<int, const DagInstance*> by_instance;
  for (const DagInstance& d : dags) by_instance[d.instance] = &d;

  auto lookup = [&](const TaskKey& key) -> const DagInstance* {
    auto it = by_instance.find(key.instance);
    if (it == by_instance.end() || key.task >= it->second->dag->size()) return nullptr;
    return it->second;
  };

  std::vector<std::vector<std::pair<Time, Time>>> per_pe(platform.size());
  for (const Assignment& r : running) {
    if (r.pe < platform.size()) per_pe[r.pe].emplace_back(r.start, r.end);
  }

  for (const auto& [key, a] : table.assignments) {
    const DagInstance* d = lookup(key);
    if (d == nullptr || !d->pending(key.task)) {
      out.push_back({K::unknown_task, "assignment for " + to_string(key) +
                                          " does not name a pending task"});
      continue;
    }
    const TaskNode& t = d->dag->task(key.task);
    if (a.pe >= platform.size() || !t.supports(a.pe)) {
      out.push_back({K::unsupported_pe, "task " + to_string(key) + " placed on PE " +
                                            std::to_string(a.pe) + " which cannot run it"});
      continue;
    }
    if (time_less(a.end - a.start, t.exec_on(a.pe)) ||
        time_less(t.exec_on(a.pe), a.end - a.start)) {
      out.push_back({K::bad_duration, "task " + to_string(key) + " interval length " +
                                          std::to_string(a.end - a.start) + " != " +
                                          std::to_string(t.exec_on(a.pe))});
    }
    if (time_less(a.start, now)) {
      out.push_back({K::before_now, "task " + to_string(key) + " starts at " +
                                        std::to_string(a.start) + " before now"});
    }
    per_pe[a.pe].emplace_back(a.start, a.end);
  }

  for (const DagInstance& d : dags) {
    for (std::size_t t = 0; t < d.dag->size(); ++t) {
      if (!d.pending(t) || d.dag->task(t).synthetic) continue;
      if (!table.assignments.contains(TaskKey{d.instance, t})) {
        out.push_back({K::missing_assignment,
                       "pending task " + to_string(TaskKey{d.instance, t}) + " has no assignment"});
      }
    }
  }

  for (std::size_t pe = 0; pe < per_pe.size(); ++pe) {
    auto& ivs = per_pe[pe];
    std::erase_if(ivs, [](const auto& iv) { return !(iv.second > iv.first); });
    std::sort(ivs.begin(), ivs.end());
    for (std::size_t i = 1; i < ivs.size(); ++i) {
      if (time_less(ivs[i].first, ivs[i - 1].second)) {
        out.push_back({K::overlap, "PE " + std::to_string(pe) + ": [" +
                                       std::to_string(ivs[i - 1].first) + ", " +
                                       std::to_string(ivs[i - 1].second) + ") overlaps [" +
                                       std::to_string(ivs[i].first) + ", " +
                                       std::to_string(ivs[i].second) + ")"});
      }
    }
  }

  auto placed = [&](const DagInstance& d, std::size_t t) -> std::optional<Placement> {
    if (!d.pending(t)) return d.fixed[t];
    auto it = table.assignments.find(TaskKey{d.instance, t});
    if (it == table.assignments.end()) return std::nullopt;
    return it->second.placement();
  };

  for (const DagInstance& d : dags) {
    for (const Edge& e : d.dag->edges()) {
      std::size_t s = d.dag->index_of(e.src);
      std::size_t t = d.dag->index_of(e.dst);
      if (!d.pending(t)) {
        if (d.pending(s)) {
          out.push_back({K::precedence, "task " + to_string(TaskKey{d.instance, t}) +
                                            " already started before its pending parent"});
        }
        continue;
      }
      auto ps = placed(d, s);
      auto pt = placed(d, t);
      if (!ps || !pt || ps->pe >= platform.size() || pt->pe >= platform.size()) continue;
      Time arrival = ps->end + platform.comm_time(e.data_volume, ps->pe, pt->pe);
      if (time_less(pt->start, arrival)) {
        out.push_back({K::precedence, "task " + to_string(TaskKey{d.instance, t}) +
                                          " starts at " + std::to_string(pt->start) +
                                          " before its data arrives at " +
                                          std::to_string(arrival)});
      }
    }
  }

  // Acyclicity of DAG edges plus dynamic dependencies over scheduled tasks.
  std::map<TaskKey, std::size_t> node;
  for (const auto& [key, a] : table.assignments) node.emplace(key, node.size());
  std::vector<graph::Arc> arcs;
  for (const DagInstance& d : dags) {
    for (std::size_t s = 0; s < d.dag->size(); ++s) {
      auto from = node.find(TaskKey{d.instance, s});
      if (from == node.end()) continue;
      for (const Link& l : d.dag->successors(s)) {
        auto to = node.find(TaskKey{d.instance, l.task});
        if (to != node.end()) arcs.emplace_back(from->second, to->second);
      }
    }
  }
  for (const auto& [a, b] : table.dynamic_deps) {
    auto from = node.find(a);
    auto to = node.find(b);
    if (from == node.end() || to == node.end()) {
      out.push_back({K::unknown_task, "dynamic dependency " + to_string(a) + " -> " +
                                          to_string(b) + " names an unscheduled task"});
      continue;
    }
    arcs.emplace_back(from->second, to->second);
  }
  if (!graph::topological_order(node.size(), arcs)) {
    out.push_back({K::dependency_cycle, "DAG edges plus dynamic dependencies contain a cycle"});
  }
  return out;
}

/// Per-PE chains of consecutive assignments in slot order, as ordering
/// edges for the runtime.
inline std::set<std::pair<TaskKey, TaskKey>> chain_dependencies(
    const std::map<TaskKey, Assignment>& assignments, std::size_t num_pes) {
  std::vector<std::vector<const Assignment*>> per_pe(num_pes);
  for (const auto& [key, a] : assignments) per_pe[a.pe].push_back(&a);
  std::set<std::pair<TaskKey, TaskKey>> deps;
  for (auto& list : per_pe) {
    std::sort(list.begin(), list.end(), [](const Assignment* x, const Assignment* y) {
      if (x->start != y->start) return x->start < y->start;
      return x->key < y->key;
    });
    for (std::size_t i = 1; i < list.size(); ++i) deps.emplace(list[i - 1]->key, list[i]->key);
  }
  return deps;
}

/// Fixed busy intervals as per-PE timelines.
inline std::vector<PeTimeline> timelines_from(std::span<const Assignment> busy,
                                              std::size_t num_pes) {
  std::vector<PeTimeline> tl;
  tl.reserve(num_pes);
  for (std::size_t k = 0; k < num_pes; ++k) tl.emplace_back(k);
  for (const Assignment& a : busy) tl.at(a.pe).insert({a.start, a.end, a.key});
  return tl;
}

}  // namespace hetsched
