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
#include <bit>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "hetsched/model.hpp"
#include "hetsched/random.hpp"
#include "hetsched/sched_core.hpp"
#include "hetsched/scheduler.hpp"

namespace hetsched {

class DeadlockError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TaskStatus { blocked, ready, scheduled, running, done };

inline std::string_view to_string(TaskStatus s) {
  switch (s) {
    case TaskStatus::blocked: return "blocked";
    case TaskStatus::ready: return "ready";
    case TaskStatus::scheduled: return "scheduled";
    case TaskStatus::running: return "running";
    case TaskStatus::done: return "done";
  }
  return "?";
}

struct TaskRecord {
  TaskStatus status = TaskStatus::blocked;
  std::optional<std::size_t> pe;
  Time start = 0.0;
  Time end = 0.0;
  /// The plan in force when the task was dispatched.
  std::optional<Placement> planned;
};

struct FrameRecord {
  int frame_id = 0;
  std::string app;
  std::size_t app_index = 0;
  Time injection = 0.0;
  std::optional<Time> completion;
  std::vector<TaskRecord> tasks;
};

struct BusyRecord {
  Time start = 0.0;
  Time end = 0.0;
  int frame = 0;
  std::size_t task = 0;
  Watts power = 0.0;
};

struct SchedulerCall {
  Time epoch = 0.0;
  double wall_seconds = 0.0;
  std::size_t tasks = 0;
};

struct Energy {
  double dynamic = 0.0;
  double idle = 0.0;
  [[nodiscard]] double total() const { return dynamic + idle; }
};

struct SimResult {
  std::string scheduler;
  std::string time_unit;
  double target_rate = 0.0;
  Time duration = 0.0;
  /// Time the last task finished (drain included).
  Time end_time = 0.0;
  std::vector<FrameRecord> frames;
  std::vector<std::vector<BusyRecord>> pe_busy;
  std::vector<SchedulerCall> scheduler_calls;
  Energy energy;
};

struct SimConfig {
  /// Overrides the workload's seed when set.
  std::optional<std::uint64_t> seed;
  /// Actual runtimes are w * (1 + noise * U[-1, 1]); 0 keeps estimates exact.
  double noise = 0.0;
  std::string time_unit = "us";
  SchedulerOptions scheduler;
  /// Called after every timed scheduler invocation with its input, the
  /// incoming frame (whole-DAG mode only) and its output.
  std::function<void(const SchedulerInput&, const DagInstance*, const ScheduleTable&)> observer;
};

struct Arrival {
  Time time = 0.0;
  std::size_t app = 0;
};

/// Arrival trace of a workload. Depends only on (seed, rate, distribution,
/// duration, mix), so every scheduler sees the same frames.
inline std::vector<Arrival> generate_arrivals(const WorkloadSpec& w, std::uint64_t seed) {
  w.validate();
  Rng rng(derive_seed(seed, std::bit_cast<std::uint64_t>(w.target_frame_rate)));
  std::vector<Arrival> out;
  Time t = 0.0;
  while (t < w.duration && (!w.max_frames || out.size() < *w.max_frames)) {
    double u = rng.uniform();
    std::size_t app = w.mix.size() - 1;
    double acc = 0.0;
    for (std::size_t i = 0; i < w.mix.size(); ++i) {
      acc += w.mix[i].probability;
      if (u < acc) {
        app = i;
        break;
      }
    }
    out.push_back({t, app});
    t += w.arrival_distribution == ArrivalDistribution::fixed ? 1.0 / w.target_frame_rate
                                                              : rng.exponential(w.target_frame_rate);
  }
  return out;
}

inline Energy compute_energy(const std::vector<std::vector<BusyRecord>>& pe_busy,
                             const Platform& platform, Time duration) {
  Energy e;
  for (const auto& row : pe_busy) {
    for (const BusyRecord& b : row) e.dynamic += (b.end - b.start) * b.power;
  }
  for (const ProcessingElement& pe : platform.pes()) e.idle += pe.idle_power * duration;
  return e;
}

namespace detail {

class Simulator {
 public:
  Simulator(const Platform& platform, const WorkloadSpec& workload, SchedulerKind kind,
            const SimConfig& config)
      : pf_(platform),
        wl_(workload),
        cfg_(config),
        sched_(make_scheduler(kind, platform, config.scheduler)),
        noise_rng_(derive_seed(config.seed.value_or(workload.seed), 0x6e6f697365ULL)),
        running_(platform.size()) {
    for (const MixEntry& m : wl_.mix) check_compatible(*m.dag, pf_);
    result_.scheduler = std::string(to_string(kind));
    result_.time_unit = cfg_.time_unit;
    result_.target_rate = wl_.target_frame_rate;
    result_.duration = wl_.duration;
    result_.pe_busy.resize(pf_.size());
  }

  SimResult run() {
    for (const Arrival& a : generate_arrivals(wl_, cfg_.seed.value_or(wl_.seed))) {
      push(a.time, Kind::arrival, static_cast<int>(a.app), 0);
    }
    while (!events_.empty()) {
      Time now = events_.top().time;
      std::vector<int> arrivals;
      while (!events_.empty() && events_.top().time == now) {
        Event ev = events_.top();
        events_.pop();
        if (ev.kind == Kind::completion) complete(ev.a, ev.b, now);
        if (ev.kind == Kind::arrival) arrivals.push_back(inject(static_cast<std::size_t>(ev.a), now));
      }
      epoch(now, arrivals);
    }
    check_drained();
    for (std::size_t f = 0; f < frames_.size(); ++f) {
      FrameRecord& rec = result_.frames[f];
      for (std::size_t t = 0; t < rec.tasks.size(); ++t) rec.tasks[t] = frames_[f].tasks[t];
    }
    result_.energy = compute_energy(result_.pe_busy, pf_, wl_.duration);
    return std::move(result_);
  }

 private:
  enum class Kind { completion = 0, arrival = 1, wakeup = 2 };

  struct Event {
    Time time;
    Kind kind;
    std::uint64_t seq;
    int a;
    std::size_t b;
  };
  struct EventAfter {
    bool operator()(const Event& x, const Event& y) const {
      if (x.time != y.time) return x.time > y.time;
      if (x.kind != y.kind) return x.kind > y.kind;
      return x.seq > y.seq;
    }
  };

  struct FrameState {
    const AppDag* dag = nullptr;
    std::vector<TaskRecord> tasks;
    std::vector<std::size_t> waiting;  // unfinished DAG parents
    std::vector<Time> ready_at;
    std::size_t remaining = 0;
    bool finished = false;
  };

  struct Running {
    TaskKey key;
    Time start;
    Time estimate_end;
  };

  void push(Time t, Kind k, int a, std::size_t b) { events_.push({t, k, seq_++, a, b}); }

  const TaskNode& node(const TaskKey& k) const { return frames_[k.instance].dag->task(k.task); }
  TaskRecord& rec(const TaskKey& k) { return frames_[k.instance].tasks[k.task]; }

  int inject(std::size_t app, Time now) {
    int id = static_cast<int>(frames_.size());
    const AppDag* dag = wl_.mix[app].dag.get();
    FrameState f;
    f.dag = dag;
    f.tasks.resize(dag->size());
    f.remaining = dag->size();
    f.ready_at.assign(dag->size(), 0.0);
    for (std::size_t t = 0; t < dag->size(); ++t) f.waiting.push_back(dag->predecessors(t).size());
    frames_.push_back(std::move(f));
    result_.frames.push_back({id, dag->app_name(), app, now, std::nullopt, {}});
    result_.frames.back().tasks.resize(dag->size());
    live_.insert(id);
    for (std::size_t t = 0; t < dag->size(); ++t) {
      if (frames_.back().waiting[t] == 0) make_ready({id, t}, now);
    }
    return id;
  }

  void make_ready(const TaskKey& k, Time now) {
    frames_[k.instance].ready_at[k.task] = now;
    TaskRecord& r = rec(k);
    if (r.status == TaskStatus::blocked) r.status = TaskStatus::ready;
    if (!plan_.contains(k)) ready_unassigned_.push_back(k);
  }

  void complete(int frame, std::size_t task, Time now) {
    TaskKey k{frame, task};
    TaskRecord& r = rec(k);
    r.status = TaskStatus::done;
    r.end = now;
    running_[*r.pe].reset();
    FrameState& f = frames_[frame];
    for (const Link& s : f.dag->successors(task)) {
      if (--f.waiting[s.task] == 0) make_ready({frame, s.task}, now);
    }
    auto dit = dyn_succ_.find(k);
    if (dit != dyn_succ_.end()) {
      for (const TaskKey& s : dit->second) --dyn_waiting_[s];
    }
    if (--f.remaining == 0) {
      f.finished = true;
      result_.frames[frame].completion = now;
      live_.erase(frame);
      sched_->on_frame_done(frame);
    }
    result_.end_time = std::max(result_.end_time, now);
  }

  std::vector<DagInstance> outstanding(const std::set<int>& ids) const {
    std::vector<DagInstance> out;
    for (int id : ids) {
      const FrameState& f = frames_[id];
      DagInstance d{id, f.dag, std::vector<std::optional<Placement>>(f.dag->size())};
      for (std::size_t t = 0; t < f.dag->size(); ++t) {
        const TaskRecord& r = f.tasks[t];
        if (r.status == TaskStatus::done) {
          d.fixed[t] = Placement{*r.pe, r.start, r.end};
        } else if (r.status == TaskStatus::running) {
          d.fixed[t] = Placement{*r.pe, r.start, estimate_end(*r.pe)};
        }
      }
      out.push_back(std::move(d));
    }
    return out;
  }

  Time estimate_end(std::size_t pe) const { return running_[pe]->estimate_end; }

  std::vector<Assignment> running_assignments(Time now) const {
    std::vector<Assignment> out;
    for (std::size_t p = 0; p < running_.size(); ++p) {
      if (!running_[p]) continue;
      out.push_back({running_[p]->key, p, running_[p]->start,
                     std::max(running_[p]->estimate_end, now)});
    }
    return out;
  }

  // Running work plus queued plans re-timed so they never overlap: the
  // scheduler's view of when each PE frees up.
  std::vector<PeTimeline> projected_timelines(const std::vector<Assignment>& running) const {
    std::vector<PeTimeline> tl = timelines_from(running, pf_.size());
    std::vector<Time> cursor(pf_.size(), 0.0);
    for (const Assignment& r : running) cursor[r.pe] = r.end;
    std::vector<std::vector<const Assignment*>> queued(pf_.size());
    for (const auto& [k, a] : plan_) {
      if (frames_[k.instance].tasks[k.task].status < TaskStatus::running) queued[a.pe].push_back(&a);
    }
    for (std::size_t p = 0; p < pf_.size(); ++p) {
      std::sort(queued[p].begin(), queued[p].end(), [](const Assignment* x, const Assignment* y) {
        if (x->start != y->start) return x->start < y->start;
        return x->key < y->key;
      });
      for (const Assignment* a : queued[p]) {
        Time s = std::max(a->start, cursor[p]);
        Time e = s + (a->end - a->start);
        tl[p].insert({s, e, a->key});
        cursor[p] = e;
      }
    }
    return tl;
  }

  SchedulerInput make_input(Time now, InvocationMode mode) const {
    SchedulerInput in;
    in.mode = mode;
    if (mode == InvocationMode::whole_dag) {
      in.outstanding = outstanding(live_);
    } else {
      std::set<int> ids;
      for (const TaskKey& k : ready_unassigned_) ids.insert(k.instance);
      in.outstanding = outstanding(ids);
    }
    in.ready_tasks = ready_unassigned_;
    in.running = running_assignments(now);
    in.timelines = mode == InvocationMode::ready_queue ? projected_timelines(in.running)
                                                       : timelines_from(in.running, pf_.size());
    in.now = now;
    return in;
  }

  void apply_plan(const ScheduleTable& table, bool replace_deps) {
    for (const auto& [k, a] : table.assignments) {
      plan_[k] = a;
      TaskRecord& r = rec(k);
      r.pe = a.pe;
      if (r.status == TaskStatus::ready) r.status = TaskStatus::scheduled;
    }
    std::erase_if(ready_unassigned_, [&](const TaskKey& k) { return plan_.contains(k); });
    if (replace_deps) {
      dyn_succ_.clear();
      dyn_waiting_.clear();
      for (const auto& [a, b] : table.dynamic_deps) {
        if (rec(a).status == TaskStatus::done) continue;
        dyn_succ_[a].push_back(b);
        ++dyn_waiting_[b];
      }
    }
  }

  template <class Fn>
  auto timed(Time now, Fn&& fn) {
    auto t0 = std::chrono::steady_clock::now();
    auto out = fn();
    double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::size_t n = 0;
    if constexpr (std::is_same_v<decltype(out), ScheduleTable>) {
      n = out.assignments.size();
    } else {
      n = out.size();
    }
    result_.scheduler_calls.push_back({now, dt, n});
    return out;
  }

  void epoch(Time now, const std::vector<int>& arrivals) {
    InvocationMode mode = sched_->mode();
    for (int id : arrivals) {
      if (mode != InvocationMode::whole_dag) {
        sched_->on_arrival(SchedulerInput{}, DagInstance{id, frames_[id].dag, {}});
        continue;
      }
      SchedulerInput in = make_input(now, InvocationMode::whole_dag);
      const DagInstance* incoming = nullptr;
      for (const DagInstance& d : in.outstanding) {
        if (d.instance == id) incoming = &d;
      }
      ScheduleTable table = timed(now, [&] { return sched_->on_arrival(in, *incoming); });
      if (cfg_.observer) cfg_.observer(in, incoming, table);
      apply_plan(table, sched_->kind() == SchedulerKind::heft_dyn || sched_->replans_outstanding());
    }
    if (mode == InvocationMode::ready_queue && !ready_unassigned_.empty()) {
      SchedulerInput in = make_input(now, InvocationMode::ready_queue);
      std::vector<Assignment> out = timed(now, [&] { return sched_->on_ready(in); });
      ScheduleTable table;
      for (const Assignment& a : out) table.add(a);
      if (cfg_.observer) cfg_.observer(in, nullptr, table);
      apply_plan(table, false);
    }
    dispatch(now);
  }

  Time data_ready(const TaskKey& k, std::size_t pe) const {
    const FrameState& f = frames_[k.instance];
    Time r = 0.0;
    for (const Link& p : f.dag->predecessors(k.task)) {
      const TaskRecord& pr = f.tasks[p.task];
      r = std::max(r, pr.end + pf_.comm_time(p.volume, *pr.pe, pe));
    }
    return r;
  }

  // An idle PE starts one of its planned tasks whose DAG parents and dynamic
  // predecessors are done and whose input data has arrived, otherwise it
  // waits for the earliest data arrival. Lookup-table runtimes serve tasks in
  // the order they became ready; ready-queue plans are served in planned
  // order.
  bool before(const Assignment& a, const Assignment& b) const {
    if (sched_->mode() == InvocationMode::whole_dag) {
      Time ra = frames_[a.key.instance].ready_at[a.key.task];
      Time rb = frames_[b.key.instance].ready_at[b.key.task];
      if (ra != rb) return ra < rb;
    }
    if (a.start != b.start) return a.start < b.start;
    return a.key < b.key;
  }

  void dispatch(Time now) {
    std::vector<std::vector<const Assignment*>> cand(pf_.size());
    for (const auto& [k, a] : plan_) {
      const TaskRecord& r = frames_[k.instance].tasks[k.task];
      if (r.status >= TaskStatus::running || running_[a.pe]) continue;
      if (frames_[k.instance].waiting[k.task] != 0) continue;
      auto dw = dyn_waiting_.find(k);
      if (dw != dyn_waiting_.end() && dw->second != 0) continue;
      cand[a.pe].push_back(&a);
    }
    for (std::size_t p = 0; p < pf_.size(); ++p) {
      const Assignment* pick = nullptr;
      Time wake = std::numeric_limits<Time>::infinity();
      for (const Assignment* a : cand[p]) {
        Time r = data_ready(a->key, p);
        if (r > now) {
          wake = std::min(wake, r);
          continue;
        }
        if (pick == nullptr || before(*a, *pick)) pick = a;
      }
      if (pick != nullptr) {
        start(*pick, now);
      } else if (wake < std::numeric_limits<Time>::infinity() && !wakeups_.contains(wake)) {
        wakeups_.insert(wake);
        push(wake, Kind::wakeup, 0, 0);
      }
    }
  }

  void start(const Assignment& a, Time now) {
    TaskKey k = a.key;
    std::size_t pe = a.pe;
    const TaskNode& t = node(k);
    Time w = t.exec_on(pe);
    Time actual = w;
    if (cfg_.noise > 0.0) actual = w * (1.0 + cfg_.noise * (2.0 * noise_rng_.uniform() - 1.0));
    TaskRecord& r = rec(k);
    r.planned = a.placement();
    r.status = TaskStatus::running;
    r.pe = pe;
    r.start = now;
    r.end = now + actual;
    running_[pe] = Running{k, now, now + w};
    result_.pe_busy[pe].push_back({now, now + actual, k.instance, k.task, t.power_on(pe)});
    plan_.erase(k);
    push(now + actual, Kind::completion, k.instance, k.task);
  }

  void check_drained() const {
    std::ostringstream msg;
    bool stuck = false;
    for (int id : live_) {
      const FrameState& f = frames_[id];
      for (std::size_t t = 0; t < f.dag->size(); ++t) {
        const TaskRecord& r = f.tasks[t];
        if (r.status == TaskStatus::done) continue;
        stuck = true;
        TaskKey k{id, t};
        msg << "\n  frame " << id << " task " << f.dag->task(t).id << " (" << to_string(r.status)
            << ")";
        if (f.waiting[t] != 0) msg << ", waits on " << f.waiting[t] << " DAG parent(s)";
        auto dw = dyn_waiting_.find(k);
        if (dw != dyn_waiting_.end() && dw->second != 0) {
          msg << ", waits on dynamic predecessor(s):";
          for (const auto& [a, succs] : dyn_succ_) {
            if (std::find(succs.begin(), succs.end(), k) != succs.end()) msg << " " << to_string(a);
          }
        }
        if (!plan_.contains(k) && r.status < TaskStatus::running) msg << ", never assigned";
      }
    }
    if (stuck) throw DeadlockError("deadlock: no pending events but unfinished tasks remain:" + msg.str());
  }

  const Platform& pf_;
  const WorkloadSpec& wl_;
  SimConfig cfg_;
  std::unique_ptr<Scheduler> sched_;
  Rng noise_rng_;
  std::priority_queue<Event, std::vector<Event>, EventAfter> events_;
  std::uint64_t seq_ = 0;
  std::vector<FrameState> frames_;
  std::set<int> live_;
  std::map<TaskKey, Assignment> plan_;
  std::vector<TaskKey> ready_unassigned_;
  std::map<TaskKey, std::vector<TaskKey>> dyn_succ_;
  std::map<TaskKey, std::size_t> dyn_waiting_;
  std::vector<std::optional<Running>> running_;
  std::set<Time> wakeups_;
  SimResult result_;
};

}  // namespace detail

/// Runs one simulation to completion (frames in flight at `duration` drain).
/// Throws DeadlockError when work remains but no event can make progress.
inline SimResult run(const Platform& platform, const WorkloadSpec& workload, SchedulerKind kind,
                     const SimConfig& config = {}) {
  workload.validate();
  detail::Simulator sim(platform, workload, kind, config);
  return sim.run();
}

/// Post-hoc audit of an executed trace: per-PE overlap, tasks run at most
/// once on a supporting PE, and data-arrival precedence on every DAG edge.
inline std::vector<std::string> check_execution(const SimResult& r, const Platform& platform,
                                                const WorkloadSpec& workload) {
  std::vector<std::string> out;
  std::map<std::pair<int, std::size_t>, int> seen;
  for (std::size_t p = 0; p < r.pe_busy.size(); ++p) {
    std::vector<BusyRecord> row = r.pe_busy[p];
    std::sort(row.begin(), row.end(),
              [](const BusyRecord& a, const BusyRecord& b) { return a.start < b.start; });
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (++seen[{row[i].frame, row[i].task}] > 1) {
        out.push_back("frame " + std::to_string(row[i].frame) + " task " +
                      std::to_string(row[i].task) + " executed twice");
      }
      if (i > 0 && time_less(row[i].start, row[i - 1].end)) {
        out.push_back("PE " + std::to_string(p) + " runs two tasks at " +
                      std::to_string(row[i].start));
      }
    }
  }
  for (const FrameRecord& f : r.frames) {
    const AppDag& dag = *workload.mix.at(f.app_index).dag;
    for (std::size_t t = 0; t < f.tasks.size(); ++t) {
      const TaskRecord& tr = f.tasks[t];
      if (tr.status < TaskStatus::running) continue;
      if (!dag.task(t).supports(*tr.pe)) {
        out.push_back("frame " + std::to_string(f.frame_id) + " task " + dag.task(t).name +
                      " ran on unsupported PE");
      }
      if (time_less(tr.start, f.injection)) {
        out.push_back("frame " + std::to_string(f.frame_id) + " task started before injection");
      }
      for (const Link& l : dag.predecessors(t)) {
        const TaskRecord& pr = f.tasks[l.task];
        if (pr.status != TaskStatus::done ||
            time_less(tr.start, pr.end + platform.comm_time(l.volume, *pr.pe, *tr.pe))) {
          out.push_back("frame " + std::to_string(f.frame_id) + " task " + dag.task(t).name +
                        " started before its input from " + dag.task(l.task).name + " arrived");
        }
      }
    }
    if (f.completion) {
      for (const TaskRecord& tr : f.tasks) {
        if (tr.status != TaskStatus::done) {
          out.push_back("frame " + std::to_string(f.frame_id) + " completed with unfinished tasks");
          break;
        }
      }
    }
  }
  return out;
}

struct OverheadProfile {
  double mean = 0.0;
  double p95 = 0.0;
  std::size_t count = 0;
  double total = 0.0;
  /// Empirical CDF as (duration, fraction of calls <= duration).
  std::vector<std::pair<double, double>> cdf;
};

inline OverheadProfile profile_scheduler_overhead(std::span<const SchedulerCall> calls) {
  if (calls.empty()) throw std::invalid_argument("profile_scheduler_overhead: empty call log");
  std::vector<double> d;
  for (const SchedulerCall& c : calls) d.push_back(c.wall_seconds);
  std::sort(d.begin(), d.end());
  OverheadProfile p;
  p.count = d.size();
  for (double x : d) p.total += x;
  p.mean = p.total / static_cast<double>(p.count);
  std::size_t rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(p.count)));
  p.p95 = d[std::max<std::size_t>(rank, 1) - 1];
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (i + 1 < d.size() && d[i + 1] == d[i]) continue;
    p.cdf.emplace_back(d[i], static_cast<double>(i + 1) / static_cast<double>(p.count));
  }
  return p;
}

inline OverheadProfile profile_scheduler_overhead(const SimResult& result) {
  return profile_scheduler_overhead(result.scheduler_calls);
}

// ---------------------------------------------------------------------------
// Export

/// Structured result document. Wall-clock timings are left out so the
/// document is reproducible; call counts and sizes are kept.
inline nlohmann::json to_json(const SimResult& r) {
  using nlohmann::json;
  json frames = json::array();
  for (const FrameRecord& f : r.frames) {
    json tasks = json::array();
    for (const TaskRecord& t : f.tasks) {
      json jt = {{"status", to_string(t.status)}};
      jt["pe"] = t.pe ? json(*t.pe) : json(nullptr);
      if (t.status >= TaskStatus::running) {
        jt["start"] = t.start;
        jt["end"] = t.end;
      }
      tasks.push_back(std::move(jt));
    }
    frames.push_back({{"frame_id", f.frame_id},
                      {"app", f.app},
                      {"injection", f.injection},
                      {"completion", f.completion ? json(*f.completion) : json(nullptr)},
                      {"tasks", std::move(tasks)}});
  }
  json busy = json::array();
  for (const auto& row : r.pe_busy) {
    json jr = json::array();
    for (const BusyRecord& b : row) {
      jr.push_back({{"start", b.start}, {"end", b.end}, {"frame", b.frame}, {"task", b.task}});
    }
    busy.push_back(std::move(jr));
  }
  json calls = json::array();
  for (const SchedulerCall& c : r.scheduler_calls) {
    calls.push_back({{"epoch", c.epoch}, {"tasks", c.tasks}});
  }
  return {{"scheduler", r.scheduler},
          {"time_unit", r.time_unit},
          {"target_rate", r.target_rate},
          {"duration", r.duration},
          {"end_time", r.end_time},
          {"energy", {{"dynamic", r.energy.dynamic}, {"static", r.energy.idle},
                      {"total", r.energy.total()}}},
          {"frames", std::move(frames)},
          {"pe_busy", std::move(busy)},
          {"scheduler_calls", std::move(calls)}};
}

struct GanttRow {
  Time start = 0.0;
  Time end = 0.0;
  int frame_id = 0;
  std::string task_name;
  int color_key = 0;
};

struct GanttExport {
  std::vector<std::string> pe_names;
  std::vector<std::vector<GanttRow>> rows;
};

inline GanttExport gantt_of(const SimResult& r, const Platform& platform,
                            std::span<const std::shared_ptr<const AppDag>> apps) {
  GanttExport g;
  for (const ProcessingElement& pe : platform.pes()) g.pe_names.push_back(pe.name);
  g.rows.resize(platform.size());
  for (std::size_t p = 0; p < r.pe_busy.size(); ++p) {
    for (const BusyRecord& b : r.pe_busy[p]) {
      const AppDag& dag = *apps[r.frames[b.frame].app_index];
      g.rows[p].push_back({b.start, b.end, b.frame, dag.task(b.task).name, b.frame % 12});
    }
    std::sort(g.rows[p].begin(), g.rows[p].end(),
              [](const GanttRow& a, const GanttRow& b) { return a.start < b.start; });
  }
  return g;
}

inline GanttExport gantt_of(const ScheduleTable& table, const Platform& platform,
                            const AppDag& dag) {
  GanttExport g;
  for (const ProcessingElement& pe : platform.pes()) g.pe_names.push_back(pe.name);
  g.rows.resize(platform.size());
  for (const auto& [k, a] : table.assignments) {
    g.rows[a.pe].push_back({a.start, a.end, k.instance, dag.task(k.task).name, k.instance % 12});
  }
  for (auto& row : g.rows) {
    std::sort(row.begin(), row.end(), [](const GanttRow& a, const GanttRow& b) { return a.start < b.start; });
  }
  return g;
}

inline nlohmann::json to_json(const GanttExport& g) {
  using nlohmann::json;
  json pes = json::array();
  for (std::size_t p = 0; p < g.rows.size(); ++p) {
    json rows = json::array();
    for (const GanttRow& r : g.rows[p]) {
      rows.push_back({{"start", r.start}, {"end", r.end}, {"frame_id", r.frame_id},
                      {"task", r.task_name}, {"color", r.color_key}});
    }
    pes.push_back({{"pe", g.pe_names[p]}, {"rows", std::move(rows)}});
  }
  return {{"gantt", std::move(pes)}};
}

}  // namespace hetsched
