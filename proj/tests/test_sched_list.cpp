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

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "hetsched/canonical.hpp"
#include "hetsched/sched_list.hpp"
#include "hetsched/scheduler.hpp"
#include "test_support.hpp"

using namespace hetsched;
using namespace hetsched::testing;

namespace {

// One-frame ready-queue state: every task of `dag` listed in `ready` is
// ready at `now`; PEs are busy on [0, avail[k]).
SchedulerInput ready_state(const AppDag& dag, std::vector<std::size_t> ready,
                           std::vector<Time> avail, Time now = 0.0) {
  SchedulerInput in;
  in.mode = InvocationMode::ready_queue;
  in.outstanding.push_back({0, &dag, std::vector<std::optional<Placement>>(dag.size())});
  for (std::size_t t : ready) in.ready_tasks.push_back({0, t});
  in.now = now;
  for (std::size_t k = 0; k < avail.size(); ++k) {
    in.timelines.emplace_back(k);
    if (avail[k] > 0) in.timelines.back().insert({0.0, avail[k], {-1, k}});
  }
  return in;
}

std::size_t pe_for(const std::vector<Assignment>& out, std::size_t t) {
  for (const Assignment& a : out) {
    if (a.key.task == t) return a.pe;
  }
  throw std::logic_error("task not assigned");
}

AppDag three_power_task() {
  return AppDag("three_power", {task(1, {100.0, 100.0, 100.0}, {1.0, 2.0, 3.0})}, {});
}

}  // namespace

// --- met -------------------------------------------------------------------

TEST(Met, MinimumTimePe) {
  AppDag d("m", {task(1, {14.0, 16.0, 9.0})}, {});
  auto out = met_schedule(ready_state(d, {0}, {0, 0, 0}), cpus(3));
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].pe, 2u);
}

TEST(Met, TieGoesToLowerIndex) {
  AppDag d("m", {task(1, {5.0, 5.0})}, {});
  EXPECT_EQ(met_schedule(ready_state(d, {0}, {0, 0}), cpus(2))[0].pe, 0u);
}

TEST(Met, FifoSerializesOnSamePe) {
  AppDag d("m", {task(1, {4.0, 6.0}), task(2, {4.0, 6.0})}, {});
  auto out = met_schedule(ready_state(d, {1, 0}, {0, 0}), cpus(2));
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].key.task, 1u);  // FIFO order of the ready queue
  EXPECT_EQ(out[0].pe, 0u);
  EXPECT_EQ(out[1].pe, 0u);
  EXPECT_DOUBLE_EQ(out[1].start, 4.0);
}

TEST(Met, AppendsWithoutInsertion) {
  AppDag d("m", {task(1, {2.0, 9.0})}, {});
  SchedulerInput in = ready_state(d, {0}, {0, 0});
  in.timelines[0].insert({5.0, 8.0, {-1, 0}});
  auto out = met_schedule(in, cpus(2));
  EXPECT_DOUBLE_EQ(out[0].start, 8.0);  // the [0, 5) gap is not used
}

// --- heft_base ---------------------------------------------------------------

TEST(HeftBase, CanonicalMakespanAndTrace) {
  AppDag d = canonical_dag();
  ScheduleTable t = heft_base(d, canonical_platform());
  EXPECT_DOUBLE_EQ(t.makespan(), 80.0);
  EXPECT_TRUE(t.dynamic_deps.empty());
  // task id -> (pe, start, end), traced by hand
  std::map<int, std::tuple<std::size_t, Time, Time>> want = {
      {1, {2, 0, 9}},   {3, {2, 9, 28}},  {4, {1, 18, 26}}, {2, {0, 27, 40}},
      {5, {2, 28, 38}}, {6, {1, 26, 42}}, {9, {1, 56, 68}}, {7, {2, 38, 49}},
      {8, {0, 57, 62}}, {10, {1, 73, 80}}};
  for (const auto& [id, v] : want) {
    const Assignment& a = t.assignments.at(TaskKey{0, d.index_of(id)});
    EXPECT_EQ(a.pe, std::get<0>(v)) << "task " << id;
    EXPECT_DOUBLE_EQ(a.start, std::get<1>(v)) << "task " << id;
    EXPECT_DOUBLE_EQ(a.end, std::get<2>(v)) << "task " << id;
  }
}

TEST(HeftBase, SingleTask) {
  AppDag d("s", {task(1, {14.0, 16.0, 9.0})}, {});
  ScheduleTable t = heft_base(d, cpus(3));
  const Assignment& a = t.assignments.at(TaskKey{0, 0});
  EXPECT_EQ(a.pe, 2u);
  EXPECT_DOUBLE_EQ(a.start, 0.0);
  EXPECT_DOUBLE_EQ(a.end, 9.0);
}

TEST(HeftBase, ChainOnOnePe) {
  AppDag d("c", {task(1, {3.0}), task(2, {4.0})}, {{1, 2, 0.0}});
  ScheduleTable t = heft_base(d, cpus(1));
  EXPECT_DOUBLE_EQ(t.assignments.at(TaskKey{0, 1}).start, t.assignments.at(TaskKey{0, 0}).end);
}

TEST(HeftBase, NowShiftsSchedule) {
  AppDag d = canonical_dag();
  ScheduleTable t = heft_base(d, canonical_platform(), 100.0, 3);
  EXPECT_DOUBLE_EQ(t.makespan(), 80.0);
  EXPECT_DOUBLE_EQ(t.assignments.begin()->second.start, 100.0);
  EXPECT_EQ(t.assignments.begin()->first.instance, 3);
}

// --- merge_dags ----------------------------------------------------------------

TEST(MergeDags, SingleDagGetsTwoZeroNodes) {
  AppDag c = canonical_dag();
  std::vector<AppDag> in = {c};
  MergedDag m = merge_dags(in);
  EXPECT_EQ(m.dag.size(), 12u);
  for (std::size_t v : {m.entry, m.exit}) {
    const TaskNode& t = m.dag.task(v);
    EXPECT_TRUE(t.synthetic);
    for (std::size_t k = 0; k < 3; ++k) {
      EXPECT_EQ(*t.exec_time[k], 0.0);
      EXPECT_EQ(*t.power[k], 0.0);
    }
  }
  EXPECT_EQ(m.dag.successors(m.entry).size(), 1u);
  EXPECT_EQ(m.dag.predecessors(m.exit).size(), 1u);
  for (const Link& l : m.dag.successors(m.entry)) EXPECT_EQ(l.volume, 0.0);
}

TEST(MergeDags, TwoCanonicalDags) {
  AppDag c = canonical_dag();
  std::vector<AppDag> in = {c, c};
  MergedDag m = merge_dags(in);
  EXPECT_EQ(m.dag.size(), 22u);
  EXPECT_EQ(m.dag.topological_order().size(), 22u);
  EXPECT_EQ(m.dag.edges().size(), 30u + 4u);
  std::size_t mapped = 0;
  for (const auto& o : m.origin) mapped += o.has_value() ? 1 : 0;
  EXPECT_EQ(mapped, 20u);
  // identity preserved: task 10 of the second partial keeps its times
  for (std::size_t i = 0; i < m.dag.size(); ++i) {
    if (m.origin[i] && m.origin[i]->first == 1) {
      EXPECT_EQ(m.dag.task(i).exec_time, c.task(m.origin[i]->second).exec_time);
    }
  }
}

TEST(MergeDags, NoDags) {
  MergedDag m = merge_dags(std::span<const AppDag>{}, 2);
  EXPECT_EQ(m.dag.size(), 2u);
  ASSERT_EQ(m.dag.successors(m.entry).size(), 1u);
  EXPECT_EQ(m.dag.successors(m.entry)[0].task, m.exit);
}

// --- heft_dyn --------------------------------------------------------------------

TEST(HeftDyn, IdleSystemEqualsHeftBase) {
  AppDag d = canonical_dag();
  Platform pf = canonical_platform();
  SchedulerInput in;
  in.mode = InvocationMode::whole_dag;
  DagInstance inc{0, &d, {}};
  in.outstanding = {inc};
  ScheduleTable dyn = heft_dyn(in, inc, pf);
  ScheduleTable base = heft_base(d, pf);
  ASSERT_EQ(dyn.assignments.size(), base.assignments.size());
  for (const auto& [k, a] : base.assignments) {
    const Assignment& b = dyn.assignments.at(k);
    EXPECT_EQ(a.pe, b.pe);
    EXPECT_DOUBLE_EQ(a.start, b.start);
    EXPECT_DOUBLE_EQ(a.end, b.end);
  }
  EXPECT_EQ(dyn.dynamic_deps, chain_dependencies(dyn.assignments, 3));
}

namespace {

// Frame 0 planned by heft_base at 0 and frozen at `now`: finished tasks and
// running tasks become fixed, running ones also occupy their PE.
struct MidState {
  AppDag dag = canonical_dag();
  Platform pf = canonical_platform();
  SchedulerInput in;
  DagInstance incoming;
};

// Fills `s` in place: the instances point into s.dag.
void mid_execution(MidState& s, Time now) {
  ScheduleTable first = heft_base(s.dag, s.pf);
  DagInstance f0{0, &s.dag, std::vector<std::optional<Placement>>(s.dag.size())};
  s.in.mode = InvocationMode::whole_dag;
  s.in.now = now;
  for (const auto& [k, a] : first.assignments) {
    if (a.start <= now) f0.fixed[k.task] = a.placement();
    if (a.start <= now && a.end > now) s.in.running.push_back(a);
  }
  s.incoming = {1, &s.dag, {}};
  s.in.outstanding = {f0, s.incoming};
  s.in.timelines = timelines_from(s.in.running, 3);
}

}  // namespace

TEST(HeftDyn, SecondFrameMidExecutionInterleavesAndValidates) {
  MidState s;
  mid_execution(s, 30.0);
  ScheduleTable dyn = heft_dyn(s.in, s.incoming, s.pf);
  auto v = validate_schedule(dyn, s.in.outstanding, s.pf, s.in.running, s.in.now);
  for (const auto& x : v) ADD_FAILURE() << x.message;

  ScheduleTable base = heft_base(s.dag, s.pf, s.in.now, 1);
  bool differs = false;
  for (const auto& [k, a] : base.assignments) {
    const Assignment& b = dyn.assignments.at(k);
    differs = differs || a.pe != b.pe || a.start != b.start;
  }
  EXPECT_TRUE(differs);
  Time frame0_end = 0.0;
  Time frame1_first = 1e18;
  for (const auto& [k, a] : dyn.assignments) {
    if (k.instance == 0) frame0_end = std::max(frame0_end, a.end);
    if (k.instance == 1) frame1_first = std::min(frame1_first, a.start);
  }
  EXPECT_LT(frame1_first, frame0_end);  // frames interleave
}

TEST(HeftDyn, RunningTaskBlocksItsPe) {
  MidState s;
  mid_execution(s, 30.0);
  ASSERT_FALSE(s.in.running.empty());
  ScheduleTable dyn = heft_dyn(s.in, s.incoming, s.pf);
  for (const Assignment& r : s.in.running) {
    for (const auto& [k, a] : dyn.assignments) {
      if (a.pe == r.pe) EXPECT_GE(a.start, r.end) << to_string(k);
    }
  }
  // and nothing starts before now
  for (const auto& [k, a] : dyn.assignments) EXPECT_GE(a.start, s.in.now);
}

TEST(HeftDyn, OptionsSwitchMechanismsOff) {
  MidState s;
  mid_execution(s, 30.0);
  HeftDynOptions o;
  o.merge = false;
  ScheduleTable only_new = heft_dyn(s.in, s.incoming, s.pf, o);
  for (const auto& [k, a] : only_new.assignments) EXPECT_EQ(k.instance, 1);
  o = {};
  o.dynamic_deps = false;
  EXPECT_TRUE(heft_dyn(s.in, s.incoming, s.pf, o).dynamic_deps.empty());
  o = {};
  o.running_constraints = false;
  ScheduleTable free_run = heft_dyn(s.in, s.incoming, s.pf, o);
  EXPECT_EQ(free_run.assignments.size(), heft_dyn(s.in, s.incoming, s.pf).assignments.size());
}

// --- heft_rt ---------------------------------------------------------------------

TEST(HeftRt, SingleTaskIdle) {
  AppDag d("s", {task(1, {14.0, 16.0, 9.0})}, {});
  auto out = heft_rt(ready_state(d, {0}, {0, 0, 0}, 50.0), cpus(3));
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].pe, 2u);
  EXPECT_DOUBLE_EQ(out[0].start, 50.0);
  EXPECT_DOUBLE_EQ(out[0].end, 59.0);
}

TEST(HeftRt, IndependentTasksSpread) {
  AppDag d("s", {task(1, {5.0, 5.0}), task(2, {5.0, 5.0})}, {});
  auto out = heft_rt(ready_state(d, {0, 1}, {0, 0}), cpus(2));
  ASSERT_EQ(out.size(), 2u);
  EXPECT_NE(out[0].pe, out[1].pe);
}

TEST(HeftRt, OrderFollowsMeanExecTime) {
  // Greedy EFT depends on the order on these sets; the result must be the one
  // produced by placing tasks by descending mean execution time.
  Rng rng(23);
  int order_sensitive = 0;
  for (int rep = 0; rep < 300; ++rep) {
    std::vector<TaskNode> ts;
    for (int i = 0; i < 3; ++i) {
      ts.push_back(task(i + 1, {double(rng.uniform_int(1, 20)), double(rng.uniform_int(1, 20))}));
    }
    AppDag d("r", ts, {});
    std::vector<Time> avail = {double(rng.uniform_int(0, 10)), double(rng.uniform_int(0, 10))};
    auto greedy = [&](std::vector<std::size_t> perm) {
      std::vector<Time> free = avail;
      std::map<std::size_t, std::pair<std::size_t, Time>> placed;
      for (std::size_t t : perm) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < 2; ++k) {
          if (free[k] + *ts[t].exec_time[k] < free[best] + *ts[t].exec_time[best]) best = k;
        }
        placed[t] = {best, free[best]};
        free[best] += *ts[t].exec_time[best];
      }
      return placed;
    };
    std::vector<std::size_t> perm = {0, 1, 2};
    std::set<std::map<std::size_t, std::pair<std::size_t, Time>>> outcomes;
    do {
      outcomes.insert(greedy(perm));
    } while (std::next_permutation(perm.begin(), perm.end()));
    if (outcomes.size() > 1) ++order_sensitive;

    std::vector<std::size_t> by_mean = {0, 1, 2};
    std::stable_sort(by_mean.begin(), by_mean.end(), [&](std::size_t a, std::size_t b) {
      return mean_exec_time(ts[a]) > mean_exec_time(ts[b]);
    });
    auto want = greedy(by_mean);
    auto out = heft_rt(ready_state(d, {0, 1, 2}, avail), cpus(2));
    for (const Assignment& a : out) {
      ASSERT_EQ(a.pe, want[a.key.task].first) << "rep " << rep;
      ASSERT_DOUBLE_EQ(a.start, want[a.key.task].second) << "rep " << rep;
    }
  }
  EXPECT_GT(order_sensitive, 50);
}

TEST(HeftRt, WaitsForParentData) {
  AppDag d("c", {task(1, {5.0, 5.0}), task(2, {5.0, 5.0})}, {{1, 2, 3.0}});
  SchedulerInput in = ready_state(d, {1}, {0, 0}, 5.0);
  in.outstanding[0].fixed[0] = Placement{1, 0.0, 5.0};
  auto out = heft_rt(in, cpus(2));
  EXPECT_EQ(out[0].pe, 1u);
  EXPECT_DOUBLE_EQ(out[0].start, 5.0);
}

// --- heft_edp / heft_edp_lb -------------------------------------------------------

TEST(HeftEdp, OversubscribedLowPowerPeWins) {
  AppDag d = three_power_task();
  auto out = heft_edp(ready_state(d, {0}, {200, 100, 100}), cpus(3));
  EXPECT_EQ(out[0].pe, 0u);  // edp 10000 vs 20000 vs 30000
  EXPECT_DOUBLE_EQ(out[0].end, 300.0);
}

TEST(HeftEdpLb, PicksCompromisePe) {
  AppDag d = three_power_task();
  auto out = heft_edp_lb(ready_state(d, {0}, {200, 100, 100}), cpus(3));
  EXPECT_EQ(out[0].pe, 1u);  // min start 100: 40000 vs 20000 vs 30000
  EXPECT_DOUBLE_EQ(out[0].end, 200.0);
}

TEST(HeftEdp, UniformTieGoesToLowestIndex) {
  AppDag d("u", {task(1, {7.0, 7.0, 7.0})}, {});
  EXPECT_EQ(heft_edp(ready_state(d, {0}, {0, 0, 0}), cpus(3))[0].pe, 0u);
  EXPECT_EQ(heft_edp_lb(ready_state(d, {0}, {0, 0, 0}), cpus(3))[0].pe, 0u);
}

TEST(HeftEdp, EqualEdpTieGoesToEarlierEnd) {
  AppDag d("t", {task(1, {10.0, 1.0}, {1.0, 100.0})}, {});
  EXPECT_EQ(heft_edp(ready_state(d, {0}, {0, 0}), cpus(2))[0].pe, 1u);
}

TEST(HeftEdp, OrderedByEdpWeight) {
  // weight w^2 p: task 1 = 4*9 = 36, task 2 = 9*1 = 9 -> task 1 placed first
  AppDag d("o", {task(1, {2.0, 2.0}, {9.0, 9.0}), task(2, {3.0, 3.0}, {1.0, 1.0})}, {});
  auto out = heft_edp(ready_state(d, {1, 0}, {0, 0}), cpus(2));
  EXPECT_EQ(out[0].key.task, 0u);
}

TEST(HeftEdpLb, IdleEqualStartsMatchesHeftEdp) {
  Rng rng(3);
  for (int rep = 0; rep < 200; ++rep) {
    AppDag d = random_dag(rng, 1, 3, 0.0, 0.2, true);
    auto a = heft_edp(ready_state(d, {0}, {0, 0, 0}), cpus(3));
    auto b = heft_edp_lb(ready_state(d, {0}, {0, 0, 0}), cpus(3));
    ASSERT_EQ(a[0].pe, b[0].pe);
  }
}

TEST(HeftEdpLb, UniformPowerMatchesHeftRt) {
  Rng rng(99);
  for (int rep = 0; rep < 300; ++rep) {
    std::size_t z = static_cast<std::size_t>(rng.uniform_int(2, 4));
    AppDag d = random_dag(rng, static_cast<std::size_t>(rng.uniform_int(1, 4)), z, 0.0, 0.2, true);
    std::vector<TaskNode> ts(d.tasks().begin(), d.tasks().end());
    double p = rng.uniform(0.5, 3.0);
    for (TaskNode& t : ts) {
      for (std::size_t k = 0; k < z; ++k) t.power[k] = t.exec_time[k] ? std::optional(p) : std::nullopt;
    }
    AppDag u("u", ts, {});
    std::vector<Time> avail;
    for (std::size_t k = 0; k < z; ++k) avail.push_back(double(rng.uniform_int(0, 30)));
    std::vector<std::size_t> ready(u.size());
    std::iota(ready.begin(), ready.end(), 0);
    auto a = heft_rt(ready_state(u, ready, avail), cpus(z));
    auto b = heft_edp_lb(ready_state(u, ready, avail), cpus(z));
    // uniform power keeps w^2 p ordered like w, so both place in the same order
    for (std::size_t t = 0; t < u.size(); ++t) ASSERT_EQ(pe_for(a, t), pe_for(b, t)) << "rep " << rep;
  }
}

// --- OCT / PEFT -------------------------------------------------------------------

TEST(Oct, ExitRowIsZero) {
  AppDag d = canonical_dag();
  OctMatrix oct = oct_table(d, canonical_platform());
  for (double v : oct[d.index_of(10)]) EXPECT_EQ(v, 0.0);
}

TEST(Oct, TwoTaskHandRecursion) {
  // A -> B, volume 4, 2 PEs at bandwidth 2: c = 2.
  // OCT(A, p0) = min(0 + 3, 0 + 5 + 2) = 3; OCT(A, p1) = min(0 + 3 + 2, 0 + 5) = 5
  AppDag d("ab", {task(1, {1.0, 1.0}), task(2, {3.0, 5.0})}, {{1, 2, 4.0}});
  OctMatrix oct = oct_table(d, cpus(2, 2.0));
  EXPECT_DOUBLE_EQ(oct[0][0], 3.0);
  EXPECT_DOUBLE_EQ(oct[0][1], 5.0);
  EXPECT_DOUBLE_EQ(oct[1][0], 0.0);
}

TEST(Oct, CanonicalMatchesMemoizedRecursion) {
  AppDag d = canonical_dag();
  Platform pf = canonical_platform();
  auto want = oct_oracle(d, pf);
  OctMatrix got = oct_table(d, pf);
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(got[i][k], want[i][k], 1e-9);
  }
  Rng rng(41);
  for (int rep = 0; rep < 40; ++rep) {
    AppDag g = random_dag(rng, 9, 3, 0.35, 0.25, false);
    Platform p = cpus(3, rng.uniform(0.5, 2.0));
    auto o = oct_oracle(g, p);
    OctMatrix x = oct_table(g, p);
    for (std::size_t i = 0; i < g.size(); ++i) {
      for (std::size_t k = 0; k < 3; ++k) ASSERT_NEAR(x[i][k], o[i][k], 1e-9);
    }
  }
}

TEST(PeftBase, SingleTaskMatchesHeft) {
  AppDag d("s", {task(1, {14.0, 16.0, 9.0})}, {});
  EXPECT_EQ(peft_base(d, cpus(3)).assignments.at(TaskKey{0, 0}).pe,
            heft_base(d, cpus(3)).assignments.at(TaskKey{0, 0}).pe);
}

TEST(PeftBase, CanonicalValid) {
  AppDag d = canonical_dag();
  Platform pf = canonical_platform();
  ScheduleTable t = peft_base(d, pf);
  DagInstance di{0, &d, {}};
  EXPECT_TRUE(validate_schedule(t, std::span<const DagInstance>(&di, 1), pf, {}).empty());
  EXPECT_EQ(t.assignments.size(), 10u);
}

TEST(PeftBase, ChainOnOnePeSerialized) {
  AppDag d("c", {task(1, {3.0}), task(2, {4.0}), task(3, {5.0})}, {{1, 2, 2.0}, {2, 3, 1.0}});
  EXPECT_DOUBLE_EQ(peft_base(d, cpus(1)).makespan(), 12.0);
}

TEST(PeftRt, CacheFillsAndEvicts) {
  AppDag d = canonical_dag();
  Platform pf = canonical_platform();
  OctCache cache;
  auto out = peft_rt(ready_state(d, {0}, {0, 0, 0}), pf, cache);
  EXPECT_EQ(cache.size(), 1u);
  ASSERT_EQ(out.size(), 1u);
  OctMatrix oct = oct_table(d, pf);
  std::size_t best = 0;
  for (std::size_t k = 1; k < 3; ++k) {
    if (d.task(0).exec_on(k) + oct[0][k] < d.task(0).exec_on(best) + oct[0][best]) best = k;
  }
  EXPECT_EQ(out[0].pe, best);
  cache.evict(0);
  EXPECT_EQ(cache.size(), 0u);
}

TEST(SchedulerKinds, NamesRoundTrip) {
  for (SchedulerKind k : kAllSchedulers) EXPECT_EQ(scheduler_from_string(to_string(k)), k);
  EXPECT_FALSE(scheduler_from_string("nope").has_value());
  EXPECT_EQ(mode_of(SchedulerKind::heft_dyn), InvocationMode::whole_dag);
  EXPECT_EQ(mode_of(SchedulerKind::heft_rt), InvocationMode::ready_queue);
}
