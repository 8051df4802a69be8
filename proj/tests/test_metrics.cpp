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

#include <sstream>

#include "hetsched/metrics.hpp"
#include "hetsched/sweep.hpp"
#include "hetsched/synth.hpp"
#include "test_support.hpp"

using namespace hetsched;
using namespace hetsched::testing;

namespace {

SimResult frames_done(std::vector<std::pair<Time, std::optional<Time>>> spans, Time duration) {
  SimResult r;
  r.duration = duration;
  int id = 0;
  for (auto [inj, done] : spans) {
    FrameRecord f;
    f.frame_id = id++;
    f.injection = inj;
    f.completion = done;
    r.frames.push_back(f);
  }
  return r;
}

SweepPoint pt(double target, double achieved, double exec = 1.0, double energy = 1.0) {
  SweepPoint p;
  p.target_rate = target;
  p.achieved_rate = achieved;
  p.avg_exec = exec;
  p.energy_total = energy;
  return p;
}

}  // namespace

TEST(AchievedRate, Examples) {
  std::vector<std::pair<Time, std::optional<Time>>> ten;
  for (int i = 0; i < 10; ++i) ten.emplace_back(i * 5.0, i * 5.0 + 3.0);
  EXPECT_DOUBLE_EQ(achieved_rate(frames_done(ten, 100.0)), 0.1);
  EXPECT_DOUBLE_EQ(achieved_rate(frames_done({{0, std::nullopt}}, 100.0)), 0.0);
  EXPECT_DOUBLE_EQ(achieved_rate(frames_done({}, 0.0)), 0.0);
}

TEST(AchievedRate, LateCompletionsExcluded) {
  SimResult r = frames_done({{0, 50.0}, {90, 120.0}}, 100.0);
  EXPECT_DOUBLE_EQ(achieved_rate(r), 0.01);
  EXPECT_EQ(completed_frames(r), 2u);
}

TEST(AchievedRate, TracksTargetWhenUnsaturated) {
  Platform pf = synth_platform(soc_models(), 2.0);
  SynthParams p;
  p.pe_models = soc_models();
  p.n_pes = 6;
  p.n_tasks = 10;
  auto dag = std::make_shared<const AppDag>(synth_profile(p));
  // about 2000 Poisson arrivals per run, so 10% is several standard deviations
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    WorkloadSpec w = workload_of({dag}, 0.002, 1000000.0, ArrivalDistribution::exponential, seed);
    SimResult r = run(pf, w, SchedulerKind::heft_rt);
    ASSERT_GE(r.frames.size(), 1000u);
    EXPECT_NEAR(achieved_rate(r), 0.002, 0.0002);
  }
}

TEST(AvgFrameExec, Examples) {
  EXPECT_DOUBLE_EQ(avg_frame_exec(frames_done({{0, 80.0}}, 100)), 80.0);
  EXPECT_DOUBLE_EQ(avg_frame_exec(frames_done({{0, 80.0}, {10, 130.0}}, 100)), 100.0);
  EXPECT_THROW(avg_frame_exec(frames_done({{0, std::nullopt}}, 100)), std::invalid_argument);
}

TEST(TotalEnergy, DynamicPlusStatic) {
  Platform pf = cpus(2, 1.0, 0.5);
  SimResult r;
  r.duration = 100;
  r.pe_busy = {{{0, 10, 0, 0, 2.0}}, {}};
  Energy e = total_energy(r, pf);
  EXPECT_DOUBLE_EQ(e.dynamic, 20.0);
  EXPECT_DOUBLE_EQ(e.idle, 100.0);
  EXPECT_DOUBLE_EQ(e.total(), 120.0);
}

TEST(TotalEnergy, EdpNotAboveRtOnSingleTask) {
  // one ready task at a time, heterogeneous power: the EDP argmin never costs
  // more energy than the EFT argmin
  Rng rng(8);
  for (int rep = 0; rep < 50; ++rep) {
    AppDag d = random_dag(rng, 1, 3, 0.0, 0.0, false);
    auto dag = std::make_shared<const AppDag>(d);
    Platform pf = cpus(3);
    WorkloadSpec w = workload_of({dag}, 1e-3, 1.0, ArrivalDistribution::fixed, 1, 1);
    Energy a = total_energy(run(pf, w, SchedulerKind::heft_edp), pf);
    Energy b = total_energy(run(pf, w, SchedulerKind::heft_rt), pf);
    ASSERT_LE(a.total(), b.total() + 1e-12);
  }
}

TEST(Saturation, Examples) {
  std::vector<SweepPoint> all = {pt(1, 1), pt(2, 2), pt(3, 3)};
  EXPECT_DOUBLE_EQ(saturation_point(all).rate, 3.0);
  std::vector<SweepPoint> two = {pt(10, 10), pt(20, 15)};
  Saturation s = saturation_point(two, 0.05);
  EXPECT_DOUBLE_EQ(s.rate, 10.0);
  EXPECT_FALSE(s.saturated_everywhere);
}

TEST(Saturation, NoPointMeetsTarget) {
  std::vector<SweepPoint> bad = {pt(10, 5), pt(20, 7)};
  Saturation s = saturation_point(bad);
  EXPECT_TRUE(s.saturated_everywhere);
  EXPECT_DOUBLE_EQ(s.rate, 7.0);
}

TEST(Saturation, Preconditions) {
  std::vector<SweepPoint> one = {pt(1, 1)};
  EXPECT_THROW(saturation_point(one), std::invalid_argument);
  std::vector<SweepPoint> unsorted = {pt(2, 2), pt(1, 1)};
  EXPECT_THROW(saturation_point(unsorted), std::invalid_argument);
}

TEST(Improvement, Examples) {
  std::vector<double> base = {100, 100};
  Improvement same = improvement(base, base);
  EXPECT_DOUBLE_EQ(same.avg, 0.0);
  EXPECT_DOUBLE_EQ(same.max, 0.0);
  std::vector<double> rt = {50, 80};
  Improvement i = improvement(base, rt);
  EXPECT_DOUBLE_EQ(i.avg, 35.0);
  EXPECT_DOUBLE_EQ(i.max, 50.0);
}

TEST(ImprovementTable, PairsAndGridMismatch) {
  std::map<SchedulerKind, std::vector<SweepPoint>> m;
  m[SchedulerKind::heft_base] = {pt(1, 1, 100, 10), pt(2, 2, 100, 10)};
  m[SchedulerKind::heft_rt] = {pt(1, 1, 50, 10), pt(2, 2, 80, 5)};
  auto rows = improvement_table(m);
  ASSERT_EQ(rows.size(), 2u);
  const ImprovementRow* r = nullptr;
  for (const auto& x : rows) {
    if (x.base == SchedulerKind::heft_base) r = &x;
  }
  ASSERT_NE(r, nullptr);
  EXPECT_DOUBLE_EQ(r->exec_time.avg, 35.0);
  EXPECT_DOUBLE_EQ(r->energy.max, 50.0);
  std::ostringstream os;
  write_improvement_csv(os, rows);
  EXPECT_NE(os.str().find("heft_base,heft_rt,35,50,25,50"), std::string::npos) << os.str();

  m[SchedulerKind::met] = {pt(1, 1)};
  EXPECT_THROW(improvement_table(m), std::invalid_argument);
  m[SchedulerKind::met] = {pt(1, 1), pt(3, 3)};
  EXPECT_THROW(improvement_table(m), std::invalid_argument);
}

TEST(SweepCsv, HeaderAndRow) {
  std::ostringstream os;
  SweepPoint p = pt(0.5, 0.25, 12.5, 7);
  p.scheduler = SchedulerKind::heft_edp;
  std::vector<SweepPoint> pts = {p};
  write_csv(os, pts);
  std::string s = os.str();
  EXPECT_EQ(s.substr(0, s.find('\n')), kSweepCsvHeader);
  EXPECT_NE(s.find("heft_edp,0.5,0.25,12.5,"), std::string::npos);
}

TEST(Sweep, CountsSimulationsAndPairsSeeds) {
  Platform pf = synth_platform(soc_models(), 2.0);
  SynthParams p;
  p.pe_models = soc_models();
  p.n_pes = 6;
  auto dag = std::make_shared<const AppDag>(synth_profile(p));
  WorkloadSpec w = workload_of({dag}, 1.0, 2000.0, ArrivalDistribution::exponential, 1);
  std::vector<SchedulerKind> one = {SchedulerKind::heft_rt};
  SweepOptions opt;
  opt.reps = 2;
  SweepOutput out = run_sweep(pf, w, one, {0.002, 0.001}, opt);
  EXPECT_EQ(out.simulations, 4u);
  ASSERT_EQ(out.points[SchedulerKind::heft_rt].size(), 2u);
  EXPECT_DOUBLE_EQ(out.points[SchedulerKind::heft_rt][0].target_rate, 0.001);
  EXPECT_TRUE(out.failures.empty());

  // repetition k of every scheduler sees the same arrival trace
  WorkloadSpec a = w;
  a.target_frame_rate = 0.002;
  SimConfig c;
  c.seed = opt.base_seed + 1;
  SimResult x = run(pf, a, SchedulerKind::heft_rt, c);
  SimResult y = run(pf, a, SchedulerKind::met, c);
  ASSERT_EQ(x.frames.size(), y.frames.size());
  for (std::size_t i = 0; i < x.frames.size(); ++i) {
    EXPECT_EQ(x.frames[i].injection, y.frames[i].injection);
    EXPECT_EQ(x.frames[i].app_index, y.frames[i].app_index);
  }
}

TEST(Sweep, DefaultReps) {
  EXPECT_EQ(default_reps(SchedulerKind::heft_rt), 10u);
  EXPECT_EQ(default_reps(SchedulerKind::cp), 3u);
}
