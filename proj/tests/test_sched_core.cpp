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

#include "hetsched/canonical.hpp"
#include "hetsched/sched_core.hpp"
#include "hetsched/sched_list.hpp"
#include "test_support.hpp"

using namespace hetsched;
using namespace hetsched::testing;

TEST(UpwardRank, CanonicalValues) {
  AppDag d = canonical_dag();
  auto r = upward_rank(d, canonical_platform());
  EXPECT_NEAR(r[d.index_of(10)], 44.0 / 3.0, 1e-9);
  EXPECT_NEAR(r[d.index_of(1)], 108.0, 1e-9);
}

TEST(UpwardRank, MatchesMemoizedRecursion) {
  Platform pf = canonical_platform();
  AppDag d = canonical_dag();
  auto w = [](const TaskNode& t) { return mean_supported(t.exec_time); };
  auto oracle = rank_oracle(d, pf, w);
  auto r = upward_rank(d, pf);
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_NEAR(r[i], oracle[i], 1e-9);

  Rng rng(11);
  for (int rep = 0; rep < 50; ++rep) {
    Platform p = cpus(3, rng.uniform(0.5, 3.0));
    AppDag g = random_dag(rng, 12, 3, 0.3, 0.2, false);
    auto o = rank_oracle(g, p, w);
    auto x = upward_rank(g, p);
    for (std::size_t i = 0; i < g.size(); ++i) ASSERT_NEAR(x[i], o[i], 1e-9);
  }
}

TEST(UpwardRank, SingleTask) {
  AppDag d("one", {task(1, {6.0, 6.0})}, {});
  EXPECT_DOUBLE_EQ(upward_rank(d, cpus(2))[0], 6.0);
}

TEST(UpwardRankEdp, Examples) {
  AppDag one("one", {task(1, {10.0, 10.0}, {2.0, 2.0})}, {});
  EXPECT_DOUBLE_EQ(upward_rank_edp(one, cpus(2))[0], 200.0);

  AppDag c = canonical_dag();
  EXPECT_NEAR(upward_rank_edp(c, canonical_platform())[c.index_of(10)], 44.0 * 44.0 / 9.0, 1e-9);

  AppDag z("zero", {task(1, {5.0, 5.0}, {0.0, 0.0}), task(2, {4.0, 4.0}, {1.0, 1.0})},
           {{1, 2, 6.0}});
  auto r = upward_rank_edp(z, cpus(2));
  EXPECT_DOUBLE_EQ(r[0], 6.0 + 16.0);  // own weight term contributes nothing

  Rng rng(5);
  auto w = [](const TaskNode& t) {
    double m = mean_supported(t.exec_time);
    return m * m * mean_supported(t.power);
  };
  for (int rep = 0; rep < 20; ++rep) {
    AppDag g = random_dag(rng, 10, 3, 0.3, 0.2, false);
    auto o = rank_oracle(g, cpus(3), w);
    auto x = upward_rank_edp(g, cpus(3));
    for (std::size_t i = 0; i < g.size(); ++i) ASSERT_NEAR(x[i], o[i], 1e-6 * (1 + o[i]));
  }
}

TEST(EarliestStart, Examples) {
  Platform pf = cpus(2);
  AppDag lone("one", {task(1, {3.0, 3.0})}, {});
  auto none = [](std::size_t) -> std::optional<Placement> { return std::nullopt; };
  EXPECT_DOUBLE_EQ(earliest_start(lone, 0, 0, pf, none, 0.0), 0.0);

  AppDag chain("c", {task(1, {9.0, 9.0}), task(2, {1.0, 1.0})}, {{1, 2, 5.0}});
  auto parent = [](std::size_t) -> std::optional<Placement> { return Placement{0, 0.0, 9.0}; };
  EXPECT_DOUBLE_EQ(earliest_start(chain, 1, 0, pf, parent, 0.0), 9.0);
  EXPECT_DOUBLE_EQ(earliest_start(chain, 1, 1, pf, parent, 0.0), 14.0);
  EXPECT_DOUBLE_EQ(earliest_start(chain, 1, 0, pf, parent, 20.0), 20.0);
  EXPECT_THROW(earliest_start(chain, 1, 0, pf, none, 0.0), std::logic_error);
}

TEST(EarliestStart, CanonicalTaskEightOnP1) {
  // Hand trace: parents 2 (P0, ends 40, volume 19), 4 (P1, ends 26),
  // 6 (P1, ends 42); same-PE transfers are free.
  AppDag d = canonical_dag();
  Platform pf = canonical_platform();
  std::map<int, Placement> placed = {{2, {0, 27, 40}}, {4, {1, 18, 26}}, {6, {1, 26, 42}}};
  auto lookup = [&](std::size_t j) -> std::optional<Placement> {
    return placed.at(d.task(j).id);
  };
  EXPECT_DOUBLE_EQ(earliest_start(d, d.index_of(8), 1, pf, lookup, 0.0), 59.0);
}

TEST(EftInsertion, Examples) {
  PeTimeline empty(0);
  Slot s = eft_insertion(10.0, empty, 5.0);
  EXPECT_DOUBLE_EQ(s.start, 5.0);
  EXPECT_DOUBLE_EQ(s.end, 15.0);

  PeTimeline tl(0);
  tl.insert({0, 10, {0, 0}});
  tl.insert({20, 30, {0, 1}});
  s = eft_insertion(10.0, tl, 0.0);
  EXPECT_DOUBLE_EQ(s.start, 10.0);
  EXPECT_DOUBLE_EQ(s.end, 20.0);
  s = eft_insertion(11.0, tl, 0.0);
  EXPECT_DOUBLE_EQ(s.start, 30.0);
  EXPECT_DOUBLE_EQ(s.end, 41.0);
  EXPECT_EQ(tl.busy().size(), 2u);  // not mutated
}

TEST(EftInsertion, MatchesIntegerSlotScan) {
  Rng rng(17);
  for (int rep = 0; rep < 500; ++rep) {
    PeTimeline tl(0);
    std::vector<std::pair<int, int>> busy;
    int t = static_cast<int>(rng.uniform_int(0, 5));
    for (int i = 0; i < 4; ++i) {
      int len = static_cast<int>(rng.uniform_int(1, 8));
      busy.emplace_back(t, t + len);
      tl.insert({double(t), double(t + len), {0, std::size_t(i)}});
      t += len + static_cast<int>(rng.uniform_int(0, 9));
    }
    int w = static_cast<int>(rng.uniform_int(1, 10));
    int ready = static_cast<int>(rng.uniform_int(0, 40));
    int expect = ready;
    for (;; ++expect) {
      bool fits = true;
      for (auto [b, e] : busy) fits = fits && (expect + w <= b || expect >= e);
      if (fits) break;
    }
    Slot s = eft_insertion(double(w), tl, double(ready));
    ASSERT_DOUBLE_EQ(s.start, double(expect)) << "rep " << rep;
  }
}

TEST(EftInsertion, UnsupportedPeThrows) {
  TaskNode t = task(1, {std::nullopt, 3.0});
  PeTimeline tl(0);
  EXPECT_THROW(eft_insertion(t, 0, tl, 0.0), std::exception);
}

TEST(PeTimeline, RejectsOverlap) {
  PeTimeline tl(0);
  tl.insert({0, 10, {0, 0}});
  EXPECT_THROW(tl.insert({5, 12, {0, 1}}), std::logic_error);
}

TEST(ValidateSchedule, HeftOutputIsValid) {
  AppDag d = canonical_dag();
  Platform pf = canonical_platform();
  ScheduleTable t = heft_base(d, pf);
  DagInstance di{0, &d, {}};
  EXPECT_TRUE(validate_schedule(t, std::span<const DagInstance>(&di, 1), pf, {}).empty());
}

TEST(ValidateSchedule, DetectsOverlap) {
  AppDag d("two", {task(1, {5.0}), task(2, {5.0})}, {});
  Platform pf = cpus(1);
  ScheduleTable t;
  t.add({{0, 0}, 0, 0, 5});
  t.add({{0, 1}, 0, 3, 8});
  DagInstance di{0, &d, {}};
  auto v = validate_schedule(t, std::span<const DagInstance>(&di, 1), pf, {});
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, Violation::Kind::overlap);
}

TEST(ValidateSchedule, DetectsOverlapWithRunning) {
  AppDag d("one", {task(1, {5.0})}, {});
  Platform pf = cpus(1);
  ScheduleTable t;
  t.add({{1, 0}, 0, 0, 5});
  DagInstance di{1, &d, {}};
  std::vector<Assignment> running = {{{0, 0}, 0, 0, 2}};
  auto v = validate_schedule(t, std::span<const DagInstance>(&di, 1), pf, running);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, Violation::Kind::overlap);
}

TEST(ValidateSchedule, DetectsPrecedence) {
  AppDag d("c", {task(1, {5.0, 5.0}), task(2, {5.0, 5.0})}, {{1, 2, 2.0}});
  Platform pf = cpus(2);
  ScheduleTable t;
  t.add({{0, 0}, 0, 0, 5});
  t.add({{0, 1}, 1, 6, 11});  // data arrives at 7
  DagInstance di{0, &d, {}};
  auto v = validate_schedule(t, std::span<const DagInstance>(&di, 1), pf, {});
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, Violation::Kind::precedence);
}

TEST(ValidateSchedule, DetectsMissingUnsupportedAndCycle) {
  AppDag d("c", {task(1, {5.0, std::nullopt}), task(2, {5.0, 5.0})}, {{1, 2, 0.0}});
  Platform pf = cpus(2);
  DagInstance di{0, &d, {}};
  ScheduleTable t;
  t.add({{0, 0}, 1, 0, 5});
  auto v = validate_schedule(t, std::span<const DagInstance>(&di, 1), pf, {});
  bool unsupported = false, missing = false;
  for (const Violation& x : v) {
    unsupported = unsupported || x.kind == Violation::Kind::unsupported_pe;
    missing = missing || x.kind == Violation::Kind::missing_assignment;
  }
  EXPECT_TRUE(unsupported);
  EXPECT_TRUE(missing);

  ScheduleTable c;
  c.add({{0, 0}, 0, 0, 5});
  c.add({{0, 1}, 1, 5, 10});
  c.dynamic_deps.insert({{0, 1}, {0, 0}});
  v = validate_schedule(c, std::span<const DagInstance>(&di, 1), pf, {});
  ASSERT_FALSE(v.empty());
  EXPECT_EQ(v.back().kind, Violation::Kind::dependency_cycle);
}

TEST(ChainDependencies, ConsecutivePerPe) {
  std::map<TaskKey, Assignment> a;
  a[{0, 0}] = {{0, 0}, 0, 0, 5};
  a[{0, 1}] = {{0, 1}, 0, 5, 9};
  a[{0, 2}] = {{0, 2}, 1, 0, 3};
  a[{1, 0}] = {{1, 0}, 0, 9, 12};
  auto deps = chain_dependencies(a, 2);
  std::set<std::pair<TaskKey, TaskKey>> want = {{{0, 0}, {0, 1}}, {{0, 1}, {1, 0}}};
  EXPECT_EQ(deps, want);
}

TEST(PriorityOrder, TiesBrokenByTaskIdThenInstance) {
  std::vector<RankKey> keys = {{5.0, 2, 0}, {5.0, 1, 1}, {7.0, 9, 0}, {5.0, 1, 0}};
  auto order = priority_order(keys);
  std::vector<std::size_t> want = {2, 3, 1, 0};
  EXPECT_EQ(order, want);
}
