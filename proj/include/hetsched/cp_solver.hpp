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
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string_view>
#include <vector>

#include "hetsched/model.hpp"
#include "hetsched/sched_core.hpp"
#include "hetsched/sched_list.hpp"

namespace hetsched {

/// Scheduling problem at one solver invocation: the pending tasks of `dags`
/// must be placed; `running` intervals are fixed; nothing starts before `now`.
struct CpInstance {
  std::vector<DagInstance> dags;
  std::vector<Assignment> running;
  const Platform* platform = nullptr;
  Time now = 0.0;

  [[nodiscard]] std::size_t pending_count() const {
    std::size_t n = 0;
    for (const DagInstance& d : dags) n += d.pending_count();
    return n;
  }
};

inline CpInstance single_dag_instance(const AppDag& dag, const Platform& platform,
                                      Time now = 0.0) {
  return CpInstance{{DagInstance{0, &dag, {}}}, {}, &platform, now};
}

enum class CpStatus { optimal, feasible_time_limit, infeasible };

inline std::string_view to_string(CpStatus s) {
  switch (s) {
    case CpStatus::optimal: return "optimal";
    case CpStatus::feasible_time_limit: return "feasible_time_limit";
    case CpStatus::infeasible: return "infeasible";
  }
  return "?";
}

struct CpTracePoint {
  double seconds = 0.0;
  Time objective = 0.0;
};

struct CpSolution {
  ScheduleTable table;
  Time objective = 0.0;
  CpStatus status = CpStatus::infeasible;
  /// Incumbent objective each time it improved, starting with the warm start.
  std::vector<CpTracePoint> trace;
  std::uint64_t nodes = 0;
};

struct CpOptions {
  double time_limit_s = 10.0;
  /// Children explored per node; 0 = all. Truncation forfeits the optimality
  /// proof.
  std::size_t max_branching = 0;
};

/// Sum over DAGs of (latest end - earliest start) of their scheduled pending
/// tasks.
inline Time cp_objective(const ScheduleTable& table, std::span<const DagInstance> dags) {
  Time total = 0.0;
  for (const DagInstance& d : dags) {
    Time lo = std::numeric_limits<Time>::infinity();
    Time hi = -std::numeric_limits<Time>::infinity();
    for (std::size_t t = 0; t < d.dag->size(); ++t) {
      auto it = table.assignments.find(TaskKey{d.instance, t});
      if (it == table.assignments.end()) continue;
      lo = std::min(lo, it->second.start);
      hi = std::max(hi, it->second.end);
    }
    if (hi >= lo) total += hi - lo;
  }
  return total;
}

namespace detail {

/// Flattened pending tasks of a CpInstance, ordered by (instance, task).
struct FlatProblem {
  struct Pred {
    std::size_t node;
    double volume;
  };
  std::size_t n = 0;
  std::size_t z = 0;
  std::size_t ndags = 0;
  std::vector<TaskKey> key;
  std::vector<std::size_t> dag_of;
  std::vector<std::vector<std::optional<Time>>> exec;  // [node][pe]
  std::vector<Time> min_exec;
  std::vector<std::vector<Pred>> preds;
  std::vector<std::vector<std::size_t>> succs;
  std::vector<std::vector<Time>> ext_ready;  // fixed-parent data arrival, [node][pe]
  std::vector<Time> pe_free;
  std::vector<std::size_t> topo;
  std::vector<double> rank;
  std::vector<Time> static_cp;  // per DAG, min-exec critical path
  const Platform* platform = nullptr;
};

inline FlatProblem flatten(const CpInstance& in) {
  const Platform& pf = *in.platform;
  FlatProblem fp;
  fp.platform = in.platform;
  fp.z = pf.size();
  std::vector<const DagInstance*> dags;
  for (const DagInstance& d : in.dags) dags.push_back(&d);
  std::sort(dags.begin(), dags.end(),
            [](const DagInstance* a, const DagInstance* b) { return a->instance < b->instance; });
  fp.ndags = dags.size();
  std::vector<std::vector<std::size_t>> node_of(dags.size());
  for (std::size_t d = 0; d < dags.size(); ++d) {
    const DagInstance& di = *dags[d];
    check_compatible(*di.dag, pf);
    node_of[d].assign(di.dag->size(), SIZE_MAX);
    std::vector<double> r = upward_rank(*di.dag, pf);
    for (std::size_t t = 0; t < di.dag->size(); ++t) {
      if (!di.pending(t)) continue;
      node_of[d][t] = fp.n++;
      fp.key.push_back({di.instance, t});
      fp.dag_of.push_back(d);
      const TaskNode& task = di.dag->task(t);
      fp.exec.push_back(task.exec_time);
      Time m = std::numeric_limits<Time>::infinity();
      for (const auto& w : task.exec_time) {
        if (w) m = std::min(m, *w);
      }
      fp.min_exec.push_back(m);
      fp.rank.push_back(r[t]);
    }
  }
  fp.preds.resize(fp.n);
  fp.succs.resize(fp.n);
  fp.ext_ready.assign(fp.n, std::vector<Time>(fp.z, in.now));
  for (std::size_t d = 0; d < dags.size(); ++d) {
    const DagInstance& di = *dags[d];
    for (std::size_t t = 0; t < di.dag->size(); ++t) {
      std::size_t v = node_of[d][t];
      if (v == SIZE_MAX) continue;
      for (const Link& p : di.dag->predecessors(t)) {
        std::size_t u = node_of[d][p.task];
        if (u != SIZE_MAX) {
          fp.preds[v].push_back({u, p.volume});
          fp.succs[u].push_back(v);
          continue;
        }
        const Placement& f = *di.fixed[p.task];
        for (std::size_t k = 0; k < fp.z; ++k) {
          fp.ext_ready[v][k] =
              std::max(fp.ext_ready[v][k], f.end + pf.comm_time(p.volume, f.pe, k));
        }
      }
    }
  }
  fp.pe_free.assign(fp.z, in.now);
  for (const Assignment& r : in.running) fp.pe_free.at(r.pe) = std::max(fp.pe_free[r.pe], r.end);

  std::vector<graph::Arc> arcs;
  for (std::size_t v = 0; v < fp.n; ++v) {
    for (const auto& p : fp.preds[v]) arcs.emplace_back(p.node, v);
  }
  fp.topo = *graph::topological_order(fp.n, arcs);
  std::vector<Time> finish(fp.n, 0.0);
  fp.static_cp.assign(fp.ndags, 0.0);
  for (std::size_t v : fp.topo) {
    Time s = 0.0;
    for (const auto& p : fp.preds[v]) s = std::max(s, finish[p.node]);
    finish[v] = s + fp.min_exec[v];
    fp.static_cp[fp.dag_of[v]] = std::max(fp.static_cp[fp.dag_of[v]], finish[v]);
  }
  return fp;
}

class BranchAndBound {
 public:
  BranchAndBound(const FlatProblem& fp, const CpOptions& opt)
      : fp_(fp),
        opt_(opt),
        pe_(fp.n, SIZE_MAX),
        start_(fp.n, 0.0),
        end_(fp.n, 0.0),
        waiting_(fp.n, 0),
        avail_(fp.pe_free),
        lbf_(fp.n, 0.0),
        t0_(std::chrono::steady_clock::now()) {
    for (std::size_t v = 0; v < fp.n; ++v) waiting_[v] = fp.preds[v].size();
  }

  void set_incumbent(Time objective, std::vector<Placement> placement) {
    best_ = objective;
    best_placement_ = std::move(placement);
    trace_.push_back({elapsed(), objective});
  }

  /// Returns true when the search space was exhausted.
  bool run() {
    dfs(0, -std::numeric_limits<Time>::infinity(), SIZE_MAX);
    return !timed_out_ && !truncated_;
  }

  [[nodiscard]] Time best() const { return best_; }
  [[nodiscard]] const std::vector<Placement>& best_placement() const { return best_placement_; }
  [[nodiscard]] std::vector<CpTracePoint> trace() const { return trace_; }
  [[nodiscard]] std::uint64_t nodes() const { return nodes_; }

 private:
  struct Child {
    std::size_t v;
    std::size_t pe;
    Time start;
    Time end;
  };

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

  Time data_ready(std::size_t v, std::size_t k) const {
    Time r = fp_.ext_ready[v][k];
    for (const auto& p : fp_.preds[v]) {
      r = std::max(r, end_[p.node] + fp_.platform->comm_time(p.volume, pe_[p.node], k));
    }
    return r;
  }

  Time objective() const {
    std::vector<Time> lo(fp_.ndags, std::numeric_limits<Time>::infinity());
    std::vector<Time> hi(fp_.ndags, -std::numeric_limits<Time>::infinity());
    for (std::size_t v = 0; v < fp_.n; ++v) {
      lo[fp_.dag_of[v]] = std::min(lo[fp_.dag_of[v]], start_[v]);
      hi[fp_.dag_of[v]] = std::max(hi[fp_.dag_of[v]], end_[v]);
    }
    Time total = 0.0;
    for (std::size_t d = 0; d < fp_.ndags; ++d) {
      if (hi[d] >= lo[d]) total += hi[d] - lo[d];
    }
    return total;
  }

  // Appends happen in non-decreasing start order, so every unplaced task
  // starts no earlier than `floor`, and no earlier than the append point of
  // the PE it lands on. Communication between unplaced tasks is ignored.
  Time lower_bound(Time floor) {
    std::vector<Time> lo(fp_.ndags, std::numeric_limits<Time>::infinity());
    std::vector<Time> hi(fp_.ndags, -std::numeric_limits<Time>::infinity());
    std::vector<bool> any_placed(fp_.ndags, false);
    for (std::size_t v : fp_.topo) {
      std::size_t d = fp_.dag_of[v];
      if (pe_[v] != SIZE_MAX) {
        any_placed[d] = true;
        lo[d] = std::min(lo[d], start_[v]);
        hi[d] = std::max(hi[d], end_[v]);
        continue;
      }
      Time unplaced_parents = floor;
      for (const auto& p : fp_.preds[v]) {
        if (pe_[p.node] == SIZE_MAX) unplaced_parents = std::max(unplaced_parents, lbf_[p.node]);
      }
      Time best = std::numeric_limits<Time>::infinity();
      for (std::size_t k = 0; k < fp_.z; ++k) {
        if (!fp_.exec[v][k]) continue;
        Time s = std::max({unplaced_parents, avail_[k], fp_.ext_ready[v][k]});
        for (const auto& p : fp_.preds[v]) {
          if (pe_[p.node] != SIZE_MAX) {
            s = std::max(s, end_[p.node] +
                                fp_.platform->comm_time(p.volume, pe_[p.node], k));
          }
        }
        best = std::min(best, s + *fp_.exec[v][k]);
      }
      lbf_[v] = best;
      hi[d] = std::max(hi[d], best);
    }
    Time total = 0.0;
    for (std::size_t d = 0; d < fp_.ndags; ++d) {
      if (any_placed[d]) {
        total += hi[d] - lo[d];
      } else {
        total += fp_.static_cp[d];
      }
    }
    return total;
  }

  void dfs(std::size_t depth, Time last_start, std::size_t last_v) {
    if (timed_out_) return;
    if ((++nodes_ & 1023u) == 0 && elapsed() > opt_.time_limit_s) {
      timed_out_ = true;
      return;
    }
    if (depth == fp_.n) {
      Time obj = objective();
      if (obj < best_) {
        std::vector<Placement> p(fp_.n);
        for (std::size_t v = 0; v < fp_.n; ++v) p[v] = {pe_[v], start_[v], end_[v]};
        set_incumbent(obj, std::move(p));
      }
      return;
    }
    std::vector<Child> children;
    for (std::size_t v = 0; v < fp_.n; ++v) {
      if (pe_[v] != SIZE_MAX || waiting_[v] != 0) continue;
      for (std::size_t k = 0; k < fp_.z; ++k) {
        if (!fp_.exec[v][k]) continue;
        Time s = std::max(avail_[k], data_ready(v, k));
        if (s < last_start || (s == last_start && v < last_v)) continue;
        children.push_back({v, k, s, s + *fp_.exec[v][k]});
      }
    }
    std::sort(children.begin(), children.end(), [&](const Child& a, const Child& b) {
      if (fp_.rank[a.v] != fp_.rank[b.v]) return fp_.rank[a.v] > fp_.rank[b.v];
      if (a.end != b.end) return a.end < b.end;
      if (a.v != b.v) return a.v < b.v;
      return a.pe < b.pe;
    });
    if (opt_.max_branching != 0 && children.size() > opt_.max_branching) {
      children.resize(opt_.max_branching);
      truncated_ = true;
    }
    for (const Child& c : children) {
      Time saved = avail_[c.pe];
      pe_[c.v] = c.pe;
      start_[c.v] = c.start;
      end_[c.v] = c.end;
      avail_[c.pe] = c.end;
      for (std::size_t s : fp_.succs[c.v]) --waiting_[s];
      if (lower_bound(c.start) < best_) dfs(depth + 1, c.start, c.v);
      for (std::size_t s : fp_.succs[c.v]) ++waiting_[s];
      avail_[c.pe] = saved;
      pe_[c.v] = SIZE_MAX;
      if (timed_out_) return;
    }
  }

  const FlatProblem& fp_;
  CpOptions opt_;
  std::vector<std::size_t> pe_;
  std::vector<Time> start_;
  std::vector<Time> end_;
  std::vector<std::size_t> waiting_;
  std::vector<Time> avail_;
  std::vector<Time> lbf_;
  Time best_ = std::numeric_limits<Time>::infinity();
  std::vector<Placement> best_placement_;
  std::vector<CpTracePoint> trace_;
  std::uint64_t nodes_ = 0;
  bool timed_out_ = false;
  bool truncated_ = false;
  std::chrono::steady_clock::time_point t0_;
};

}  // namespace detail

/// Exact depth-first branch-and-bound over task-to-PE maps and per-PE
/// orders. Tasks are appended to their PE in non-decreasing start order,
/// which enumerates every left-shifted schedule exactly once. The incumbent
/// starts from a HEFT schedule of the same state.
inline CpSolution cp_solve(const CpInstance& instance, const CpOptions& options = {}) {
  if (instance.platform == nullptr) throw ModelError("cp_solve: instance has no platform");
  const Platform& pf = *instance.platform;
  CpSolution sol;
  for (const DagInstance& d : instance.dags) {
    check_compatible(*d.dag, pf);
    for (std::size_t t = 0; t < d.dag->size(); ++t) {
      const TaskNode& task = d.dag->task(t);
      if (!d.pending(t)) continue;
      bool any = false;
      for (std::size_t k = 0; k < pf.size(); ++k) any = any || task.supports(k);
      if (!any) return sol;
    }
  }

  detail::FlatProblem fp = detail::flatten(instance);
  detail::BranchAndBound bb(fp, options);

  auto tl = timelines_from(instance.running, pf.size());
  ScheduleTable warm = detail::list_schedule(instance.dags, pf, tl, instance.now, ListPolicy::heft);
  std::vector<Placement> warm_p(fp.n);
  for (std::size_t v = 0; v < fp.n; ++v) warm_p[v] = warm.assignments.at(fp.key[v]).placement();
  bb.set_incumbent(cp_objective(warm, instance.dags), std::move(warm_p));

  bool exhausted = bb.run();
  sol.objective = bb.best();
  for (std::size_t v = 0; v < fp.n; ++v) {
    const Placement& p = bb.best_placement()[v];
    sol.table.add({fp.key[v], p.pe, p.start, p.end});
  }
  sol.status = exhausted ? CpStatus::optimal : CpStatus::feasible_time_limit;
  sol.trace = bb.trace();
  sol.nodes = bb.nodes();
  return sol;
}

/// Exhaustive reference: every interleaving of (next ready task, PE)
/// choices, each task appended after its PE's last task. No pruning.
/// Throws ModelError when the instance has more than `max_tasks` pending
/// tasks.
inline Time brute_force_optimal(const CpInstance& instance, std::size_t max_tasks = 10) {
  const Platform& pf = *instance.platform;
  struct Node {
    int dag;
    const TaskNode* task;
    std::vector<std::pair<int, double>> parents;
    std::vector<Time> fixed_ready;
  };
  std::vector<Node> nodes;
  int ndags = 0;
  for (const DagInstance& d : instance.dags) {
    std::vector<int> idx(d.dag->size(), -1);
    for (std::size_t t : d.dag->topological_order()) {
      if (!d.pending(t)) continue;
      Node n{ndags, &d.dag->task(t), {}, std::vector<Time>(pf.size(), instance.now)};
      for (const Link& p : d.dag->predecessors(t)) {
        if (idx[p.task] >= 0) {
          n.parents.emplace_back(idx[p.task], p.volume);
        } else {
          const Placement& f = *d.fixed[p.task];
          for (std::size_t k = 0; k < pf.size(); ++k) {
            n.fixed_ready[k] = std::max(n.fixed_ready[k], f.end + pf.comm_time(p.volume, f.pe, k));
          }
        }
      }
      idx[t] = static_cast<int>(nodes.size());
      nodes.push_back(std::move(n));
    }
    ++ndags;
  }
  if (nodes.size() > max_tasks) {
    throw ModelError("brute_force_optimal: " + std::to_string(nodes.size()) +
                     " tasks exceeds the limit of " + std::to_string(max_tasks));
  }
  std::vector<Time> free(pf.size(), instance.now);
  for (const Assignment& r : instance.running) free.at(r.pe) = std::max(free[r.pe], r.end);

  const std::size_t n = nodes.size();
  std::vector<int> pe(n, -1);
  std::vector<Time> st(n, 0.0);
  std::vector<Time> en(n, 0.0);
  Time best = std::numeric_limits<Time>::infinity();

  auto leaf = [&] {
    std::vector<Time> lo(ndags, std::numeric_limits<Time>::infinity());
    std::vector<Time> hi(ndags, -std::numeric_limits<Time>::infinity());
    for (std::size_t i = 0; i < n; ++i) {
      lo[nodes[i].dag] = std::min(lo[nodes[i].dag], st[i]);
      hi[nodes[i].dag] = std::max(hi[nodes[i].dag], en[i]);
    }
    Time total = 0.0;
    for (int d = 0; d < ndags; ++d) {
      if (hi[d] >= lo[d]) total += hi[d] - lo[d];
    }
    best = std::min(best, total);
  };

  auto rec = [&](auto&& self, std::size_t placed) -> void {
    if (placed == n) {
      leaf();
      return;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (pe[i] >= 0) continue;
      bool ready = true;
      for (const auto& [p, vol] : nodes[i].parents) ready = ready && pe[p] >= 0;
      if (!ready) continue;
      for (std::size_t k = 0; k < pf.size(); ++k) {
        if (!nodes[i].task->supports(k)) continue;
        Time s = std::max(free[k], nodes[i].fixed_ready[k]);
        for (const auto& [p, vol] : nodes[i].parents) {
          s = std::max(s, en[p] + pf.comm_time(vol, static_cast<std::size_t>(pe[p]), k));
        }
        Time saved = free[k];
        pe[i] = static_cast<int>(k);
        st[i] = s;
        en[i] = s + nodes[i].task->exec_on(k);
        free[k] = en[i];
        self(self, placed + 1);
        free[k] = saved;
        pe[i] = -1;
      }
    }
  };
  rec(rec, 0);
  return n == 0 ? 0.0 : best;
}

}  // namespace hetsched
