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
#include <array>
#include <climits>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hetsched/model.hpp"
#include "hetsched/sched_core.hpp"

namespace hetsched {

enum class SchedulerKind {
  met,
  heft_base,
  heft_dyn,
  heft_rt,
  heft_edp,
  heft_edp_lb,
  peft_base,
  peft_rt,
  cp,
};

inline constexpr std::array kAllSchedulers = {
    SchedulerKind::met,      SchedulerKind::heft_base,   SchedulerKind::heft_dyn,
    SchedulerKind::heft_rt,  SchedulerKind::heft_edp,    SchedulerKind::heft_edp_lb,
    SchedulerKind::peft_base, SchedulerKind::peft_rt,    SchedulerKind::cp,
};

inline std::string_view to_string(SchedulerKind k) {
  switch (k) {
    case SchedulerKind::met: return "met";
    case SchedulerKind::heft_base: return "heft_base";
    case SchedulerKind::heft_dyn: return "heft_dyn";
    case SchedulerKind::heft_rt: return "heft_rt";
    case SchedulerKind::heft_edp: return "heft_edp";
    case SchedulerKind::heft_edp_lb: return "heft_edp_lb";
    case SchedulerKind::peft_base: return "peft_base";
    case SchedulerKind::peft_rt: return "peft_rt";
    case SchedulerKind::cp: return "cp";
  }
  return "?";
}

inline std::optional<SchedulerKind> scheduler_from_string(std::string_view s) {
  for (SchedulerKind k : kAllSchedulers) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

enum class InvocationMode { whole_dag, ready_queue };

inline InvocationMode mode_of(SchedulerKind k) {
  switch (k) {
    case SchedulerKind::heft_base:
    case SchedulerKind::heft_dyn:
    case SchedulerKind::peft_base:
    case SchedulerKind::cp:
      return InvocationMode::whole_dag;
    default:
      return InvocationMode::ready_queue;
  }
}

/// Snapshot of system state handed to a scheduler.
///
/// whole_dag: invoked on frame arrival; `outstanding` holds the frames already
/// in the system with their unstarted tasks pending.
/// ready_queue: invoked per epoch; `ready_tasks` are pairwise independent
/// tasks whose parents are all done, in the order they became ready, and
/// `timelines` hold running plus already-queued work per PE.
struct SchedulerInput {
  InvocationMode mode = InvocationMode::ready_queue;
  std::vector<DagInstance> outstanding;
  std::vector<TaskKey> ready_tasks;
  std::vector<Assignment> running;
  std::vector<PeTimeline> timelines;
  Time now = 0.0;

  [[nodiscard]] const DagInstance& instance(int id) const {
    for (const DagInstance& d : outstanding) {
      if (d.instance == id) return d;
    }
    throw std::logic_error("scheduler input has no instance " + std::to_string(id));
  }
};

// ---------------------------------------------------------------------------
// DAG merging

/// Result of merging partial DAGs under a common entry and exit node.
/// `origin[i]` maps merged node i back to (partial index, task index within
/// that partial); synthetic nodes map to std::nullopt.
struct MergedDag {
  AppDag dag;
  std::vector<std::optional<std::pair<std::size_t, std::size_t>>> origin;
  std::size_t entry = 0;
  std::size_t exit = 0;
};

/// Common-entry/common-exit merge. The synthetic entry feeds every parentless
/// task and every childless task feeds the synthetic exit, all through
/// zero-volume edges. Synthetic nodes cost nothing on every PE.
inline MergedDag merge_dags(std::span<const AppDag> partials, std::size_t num_pes) {
  MergedDag out;
  std::vector<TaskNode> tasks;
  std::vector<Edge> edges;
  int next_id = 0;
  auto synthetic = [&](const char* name) {
    TaskNode t;
    t.id = next_id++;
    t.name = name;
    t.exec_time.assign(num_pes, 0.0);
    t.power.assign(num_pes, 0.0);
    t.synthetic = true;
    return t;
  };
  tasks.push_back(synthetic("__entry"));
  out.origin.emplace_back();
  out.entry = 0;
  for (std::size_t p = 0; p < partials.size(); ++p) {
    const AppDag& dag = partials[p];
    if (dag.num_pes() != num_pes) throw ModelError("merge_dags: PE count mismatch");
    int base = next_id;
    for (std::size_t i = 0; i < dag.size(); ++i) {
      TaskNode t = dag.task(i);
      t.id = next_id++;
      tasks.push_back(std::move(t));
      out.origin.emplace_back(std::make_pair(p, i));
    }
    for (std::size_t i = 0; i < dag.size(); ++i) {
      for (const Link& s : dag.successors(i)) {
        edges.push_back({base + static_cast<int>(i), base + static_cast<int>(s.task), s.volume});
      }
      if (dag.predecessors(i).empty()) edges.push_back({0, base + static_cast<int>(i), 0.0});
    }
  }
  TaskNode exit = synthetic("__exit");
  int exit_id = exit.id;
  tasks.push_back(std::move(exit));
  out.origin.emplace_back();
  out.exit = tasks.size() - 1;
  bool any_real = tasks.size() > 2;
  if (!any_real) edges.push_back({0, exit_id, 0.0});
  for (std::size_t i = 1; i + 1 < tasks.size(); ++i) {
    auto [p, t] = *out.origin[i];
    if (partials[p].successors(t).empty()) edges.push_back({tasks[i].id, exit_id, 0.0});
  }
  out.dag = AppDag("merged", std::move(tasks), std::move(edges));
  return out;
}

inline MergedDag merge_dags(std::span<const AppDag> partials) {
  std::size_t z = partials.empty() ? 1 : partials.front().num_pes();
  return merge_dags(partials, z);
}

/// The unstarted part of an instance as a standalone DAG plus the map from
/// its task indices back to the full DAG.
struct PartialDag {
  AppDag dag;
  std::vector<std::size_t> original;
};

inline std::optional<PartialDag> partial_dag(const DagInstance& inst) {
  const AppDag& full = *inst.dag;
  std::vector<TaskNode> tasks;
  std::vector<std::size_t> original;
  for (std::size_t t = 0; t < full.size(); ++t) {
    if (!inst.pending(t)) continue;
    tasks.push_back(full.task(t));
    original.push_back(t);
  }
  if (tasks.empty()) return std::nullopt;
  std::vector<Edge> edges;
  for (const Edge& e : full.edges()) {
    if (inst.pending(full.index_of(e.src)) && inst.pending(full.index_of(e.dst))) {
      edges.push_back(e);
    }
  }
  return PartialDag{AppDag(full.app_name(), std::move(tasks), std::move(edges)),
                    std::move(original)};
}

// ---------------------------------------------------------------------------
// Optimistic cost table (PEFT)

using OctMatrix = std::vector<std::vector<double>>;

/// OCT(i,k) = max over successors j of min over PEs w running j of
/// [OCT(j,w) + w(j,w) + (avg_comm(i,j) if w != k else 0)]; exit rows are 0.
inline OctMatrix oct_table(const AppDag& dag, const Platform& platform) {
  std::size_t z = platform.size();
  OctMatrix oct(dag.size(), std::vector<double>(z, 0.0));
  auto order = dag.topological_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    std::size_t i = *it;
    for (std::size_t k = 0; k < z; ++k) {
      double worst = 0.0;
      for (const Link& s : dag.successors(i)) {
        const TaskNode& succ = dag.task(s.task);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t w = 0; w < z; ++w) {
          if (!succ.supports(w)) continue;
          double c = w == k ? 0.0 : avg_comm_cost(s.volume, platform);
          best = std::min(best, oct[s.task][w] + succ.exec_on(w) + c);
        }
        worst = std::max(worst, best);
      }
      oct[i][k] = worst;
    }
  }
  return oct;
}

/// Mean of the OCT row over the PEs that support the task.
inline double oct_rank(const TaskNode& task, std::span<const double> row) {
  double sum = 0.0;
  int n = 0;
  for (std::size_t k = 0; k < row.size(); ++k) {
    if (!task.supports(k)) continue;
    sum += row[k];
    ++n;
  }
  return n == 0 ? 0.0 : sum / n;
}

// ---------------------------------------------------------------------------
// Whole-DAG list scheduling

enum class ListPolicy { heft, peft };

struct HeftDynOptions {
  /// Merge outstanding unstarted tasks with the incoming frame.
  bool merge = true;
  /// Pre-load running tasks as fixed busy intervals.
  bool running_constraints = true;
  /// Emit per-PE ordering edges for the runtime.
  bool dynamic_deps = true;
};

namespace detail {

/// Rank-and-assign over the merge of `instances`' pending tasks. Running and
/// done tasks gate successors through their fixed placements; `timelines`
/// holds pre-existing busy intervals and receives the new ones.
inline ScheduleTable list_schedule(std::span<const DagInstance> instances,
                                   const Platform& platform, std::vector<PeTimeline>& timelines,
                                   Time now, ListPolicy policy) {
  std::vector<PartialDag> partials;
  std::vector<const DagInstance*> owner;
  for (const DagInstance& inst : instances) {
    check_compatible(*inst.dag, platform);
    if (auto p = partial_dag(inst)) {
      partials.push_back(std::move(*p));
      owner.push_back(&inst);
    }
  }
  std::vector<AppDag> dags;
  dags.reserve(partials.size());
  for (const PartialDag& p : partials) dags.push_back(p.dag);
  MergedDag merged = merge_dags(dags, platform.size());
  const AppDag& g = merged.dag;

  OctMatrix oct;
  std::vector<double> rank;
  if (policy == ListPolicy::heft) {
    rank = upward_rank(g, platform);
  } else {
    oct = oct_table(g, platform);
    rank.resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) rank[i] = oct_rank(g.task(i), oct[i]);
  }
  std::vector<RankKey> keys(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!merged.origin[i]) {
      keys[i] = {rank[i], i == merged.entry ? INT_MIN : INT_MAX,
                 i == merged.entry ? INT_MIN : INT_MAX};
      continue;
    }
    auto [p, t] = *merged.origin[i];
    keys[i] = {rank[i], dags[p].task(t).id, owner[p]->instance};
  }
  std::vector<std::size_t> order = priority_order(keys);

  // Merged node of (partial, original task index).
  std::vector<std::map<std::size_t, std::size_t>> node_of(partials.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!merged.origin[i]) continue;
    auto [p, t] = *merged.origin[i];
    node_of[p][partials[p].original[t]] = i;
  }

  std::vector<std::optional<Placement>> placed(g.size());
  std::vector<std::size_t> unplaced_preds(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) unplaced_preds[i] = g.predecessors(i).size();

  ScheduleTable table;
  std::size_t head = 0;
  while (head < order.size()) {
    // Highest-priority node whose predecessors are placed; with strictly
    // positive costs this is always order[head].
    std::size_t pick = head;
    while (unplaced_preds[order[pick]] != 0) ++pick;
    std::rotate(order.begin() + static_cast<std::ptrdiff_t>(head),
                order.begin() + static_cast<std::ptrdiff_t>(pick),
                order.begin() + static_cast<std::ptrdiff_t>(pick) + 1);
    std::size_t v = order[head++];
    for (const Link& s : g.successors(v)) --unplaced_preds[s.task];

    if (!merged.origin[v]) {
      Time ready = now;
      for (const Link& p : g.predecessors(v)) ready = std::max(ready, placed[p.task]->end);
      placed[v] = Placement{0, ready, ready};
      continue;
    }
    auto [p, t] = *merged.origin[v];
    const DagInstance& inst = *owner[p];
    std::size_t orig = partials[p].original[t];
    const TaskNode& task = g.task(v);
    auto parent_of = [&](std::size_t j) -> std::optional<Placement> {
      if (!inst.pending(j)) return inst.fixed[j];
      return placed[node_of[p].at(j)];
    };

    std::size_t best_pe = 0;
    Slot best{};
    double best_score = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < platform.size(); ++k) {
      if (!task.supports(k)) continue;
      Time ready = earliest_start(*inst.dag, orig, k, platform, parent_of, now);
      Slot slot = eft_insertion(task.exec_on(k), timelines[k], ready);
      double score = policy == ListPolicy::heft ? slot.end : slot.end + oct[v][k];
      if (score < best_score) {
        best_score = score;
        best = slot;
        best_pe = k;
      }
    }
    placed[v] = Placement{best_pe, best.start, best.end};
    TaskKey key{inst.instance, orig};
    timelines[best_pe].insert({best.start, best.end, key});
    table.add({key, best_pe, best.start, best.end});
  }
  return table;
}

inline std::vector<PeTimeline> empty_timelines(std::size_t z) {
  std::vector<PeTimeline> tl;
  for (std::size_t k = 0; k < z; ++k) tl.emplace_back(k);
  return tl;
}

}  // namespace detail

/// Static HEFT on one DAG over an idle platform, starting at `now`.
inline ScheduleTable heft_base(const AppDag& dag, const Platform& platform, Time now = 0.0,
                               int instance = 0) {
  DagInstance inst{instance, &dag, {}};
  auto tl = detail::empty_timelines(platform.size());
  return detail::list_schedule({&inst, 1}, platform, tl, now, ListPolicy::heft);
}

/// Static PEFT on one DAG over an idle platform: rank by mean OCT row, place
/// by minimum EFT + OCT.
inline ScheduleTable peft_base(const AppDag& dag, const Platform& platform, Time now = 0.0,
                               int instance = 0) {
  DagInstance inst{instance, &dag, {}};
  auto tl = detail::empty_timelines(platform.size());
  return detail::list_schedule({&inst, 1}, platform, tl, now, ListPolicy::peft);
}

/// HEFT for a runtime with interleaving frames. Re-plans every unstarted task
/// of the outstanding frames together with `incoming`, treats running tasks
/// as fixed busy intervals, and emits per-PE ordering edges. The options
/// switch each of the three mechanisms off individually.
inline ScheduleTable heft_dyn(const SchedulerInput& input, const DagInstance& incoming,
                              const Platform& platform, const HeftDynOptions& options = {}) {
  std::vector<DagInstance> instances;
  if (options.merge) {
    for (const DagInstance& d : input.outstanding) {
      if (d.instance != incoming.instance) instances.push_back(d);
    }
  }
  instances.push_back(incoming);
  std::vector<PeTimeline> tl = options.running_constraints
                                   ? timelines_from(input.running, platform.size())
                                   : detail::empty_timelines(platform.size());
  ScheduleTable table =
      detail::list_schedule(instances, platform, tl, input.now, ListPolicy::heft);
  if (options.dynamic_deps) {
    table.dynamic_deps = chain_dependencies(table.assignments, platform.size());
  }
  return table;
}

// ---------------------------------------------------------------------------
// Ready-queue schedulers

namespace detail {

inline Time ready_time(const SchedulerInput& in, const TaskKey& key, std::size_t pe,
                       const Platform& platform) {
  const DagInstance& inst = in.instance(key.instance);
  auto parent_of = [&](std::size_t j) -> std::optional<Placement> {
    if (inst.pending(j)) return std::nullopt;
    return inst.fixed[j];
  };
  return earliest_start(*inst.dag, key.task, pe, platform, parent_of, in.now);
}

inline const TaskNode& task_of(const SchedulerInput& in, const TaskKey& key) {
  return in.instance(key.instance).dag->task(key.task);
}

template <class Weight>
std::vector<TaskKey> ready_by_weight(const SchedulerInput& in, Weight&& weight) {
  std::vector<RankKey> keys;
  for (const TaskKey& k : in.ready_tasks) {
    const TaskNode& t = task_of(in, k);
    keys.push_back({weight(k, t), t.id, k.instance});
  }
  std::vector<TaskKey> out;
  for (std::size_t i : priority_order(keys)) out.push_back(in.ready_tasks[i]);
  return out;
}

struct Candidate {
  std::size_t pe;
  Slot slot;
};

inline std::vector<Candidate> candidates(const SchedulerInput& in, const TaskKey& key,
                                         const Platform& platform,
                                         const std::vector<PeTimeline>& tl) {
  const TaskNode& t = task_of(in, key);
  std::vector<Candidate> out;
  for (std::size_t k = 0; k < platform.size(); ++k) {
    if (!t.supports(k)) continue;
    out.push_back({k, eft_insertion(t.exec_on(k), tl[k], ready_time(in, key, k, platform))});
  }
  return out;
}

inline Assignment commit(std::vector<PeTimeline>& tl, const TaskKey& key, const Candidate& c) {
  tl[c.pe].insert({c.slot.start, c.slot.end, key});
  return {key, c.pe, c.slot.start, c.slot.end};
}

inline std::vector<PeTimeline> working_timelines(const SchedulerInput& in, std::size_t z) {
  if (in.timelines.size() == z) return in.timelines;
  return timelines_from(in.running, z);
}

/// EDP selection: minimum score, exact ties to the earlier end,
/// remaining ties to the lower PE index.
inline const Candidate& select_min_edp(std::span<const Candidate> cands,
                                       std::span<const double> score) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < cands.size(); ++c) {
    if (score[c] < score[best] ||
        (score[c] == score[best] && cands[c].slot.end < cands[best].slot.end)) {
      best = c;
    }
  }
  return cands[best];
}

}  // namespace detail

/// Minimum execution time: FIFO over the ready queue, each task to the PE
/// with the smallest execution time, appended after that PE's queued work.
inline std::vector<Assignment> met_schedule(const SchedulerInput& in, const Platform& platform) {
  auto tl = detail::working_timelines(in, platform.size());
  std::vector<Assignment> out;
  for (const TaskKey& key : in.ready_tasks) {
    const TaskNode& t = detail::task_of(in, key);
    std::size_t best = platform.size();
    for (std::size_t k = 0; k < platform.size(); ++k) {
      if (t.supports(k) && (best == platform.size() || t.exec_on(k) < t.exec_on(best))) best = k;
    }
    Time start = std::max(tl[best].last_end(), detail::ready_time(in, key, best, platform));
    out.push_back(detail::commit(tl, key, {best, {start, start + t.exec_on(best)}}));
  }
  return out;
}

/// HEFT reduced to a ready queue: order by mean execution time, place by
/// insertion-based minimum EFT.
inline std::vector<Assignment> heft_rt(const SchedulerInput& in, const Platform& platform) {
  auto tl = detail::working_timelines(in, platform.size());
  std::vector<Assignment> out;
  auto order = detail::ready_by_weight(
      in, [](const TaskKey&, const TaskNode& t) { return mean_exec_time(t); });
  for (const TaskKey& key : order) {
    auto cands = detail::candidates(in, key, platform, tl);
    const detail::Candidate* best = &cands.front();
    for (const auto& c : cands) {
      if (c.slot.end < best->slot.end) best = &c;
    }
    out.push_back(detail::commit(tl, key, *best));
  }
  return out;
}

/// Ready-queue EDP ordering weight: mean_exec^2 * mean_power.
inline double edp_weight(const TaskNode& t) {
  double w = mean_exec_time(t);
  return w * w * mean_power(t);
}

/// Energy-delay list scheduling: per PE, score (end - start)^2 * power and
/// take the minimum.
inline std::vector<Assignment> heft_edp(const SchedulerInput& in, const Platform& platform) {
  auto tl = detail::working_timelines(in, platform.size());
  std::vector<Assignment> out;
  auto order =
      detail::ready_by_weight(in, [](const TaskKey&, const TaskNode& t) { return edp_weight(t); });
  for (const TaskKey& key : order) {
    const TaskNode& t = detail::task_of(in, key);
    auto cands = detail::candidates(in, key, platform, tl);
    std::vector<double> score;
    for (const auto& c : cands) {
      double d = c.slot.end - c.slot.start;
      score.push_back(d * d * t.power_on(c.pe));
    }
    out.push_back(detail::commit(tl, key, detail::select_min_edp(cands, score)));
  }
  return out;
}

/// Load-balanced EDP: delay is measured from the earliest feasible start over
/// all PEs, so a PE that would make the task wait pays for the wait.
inline std::vector<Assignment> heft_edp_lb(const SchedulerInput& in, const Platform& platform) {
  auto tl = detail::working_timelines(in, platform.size());
  std::vector<Assignment> out;
  auto order =
      detail::ready_by_weight(in, [](const TaskKey&, const TaskNode& t) { return edp_weight(t); });
  for (const TaskKey& key : order) {
    const TaskNode& t = detail::task_of(in, key);
    auto cands = detail::candidates(in, key, platform, tl);
    Time min_start = std::numeric_limits<Time>::infinity();
    for (const auto& c : cands) min_start = std::min(min_start, c.slot.start);
    std::vector<double> score;
    for (const auto& c : cands) {
      double d = c.slot.end - min_start;
      score.push_back(d * d * t.power_on(c.pe));
    }
    out.push_back(detail::commit(tl, key, detail::select_min_edp(cands, score)));
  }
  return out;
}

/// Per-frame OCT tables for the ready-queue PEFT variant. Filled when a frame
/// is first seen, dropped when it finishes.
class OctCache {
 public:
  const OctMatrix& get(const DagInstance& inst, const Platform& platform) {
    auto it = cache_.find(inst.instance);
    if (it == cache_.end()) it = cache_.emplace(inst.instance, oct_table(*inst.dag, platform)).first;
    return it->second;
  }
  void evict(int instance) { cache_.erase(instance); }
  [[nodiscard]] std::size_t size() const { return cache_.size(); }

 private:
  std::map<int, OctMatrix> cache_;
};

/// PEFT reduced to a ready queue: order by mean OCT row, place by minimum
/// EFT + OCT. OCT rows come from the frame's full DAG.
inline std::vector<Assignment> peft_rt(const SchedulerInput& in, const Platform& platform,
                                       OctCache& cache) {
  auto tl = detail::working_timelines(in, platform.size());
  std::vector<Assignment> out;
  auto order = detail::ready_by_weight(in, [&](const TaskKey& k, const TaskNode& t) {
    return oct_rank(t, cache.get(in.instance(k.instance), platform)[k.task]);
  });
  for (const TaskKey& key : order) {
    const auto& row = cache.get(in.instance(key.instance), platform)[key.task];
    auto cands = detail::candidates(in, key, platform, tl);
    const detail::Candidate* best = &cands.front();
    for (const auto& c : cands) {
      if (c.slot.end + row[c.pe] < best->slot.end + row[best->pe]) best = &c;
    }
    out.push_back(detail::commit(tl, key, *best));
  }
  return out;
}

}  // namespace hetsched
