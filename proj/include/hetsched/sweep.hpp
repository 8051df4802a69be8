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
#include <atomic>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "hetsched/metrics.hpp"
#include "hetsched/sim_engine.hpp"

namespace hetsched {

struct SweepOptions {
  /// Repetitions per cell; unset means 10, or 3 for cp.
  std::optional<std::size_t> reps;
  /// Repetition k runs with seed base_seed + k for every scheduler.
  std::uint64_t base_seed = 1;
  std::size_t jobs = 1;
  SimConfig sim;
};

struct SweepFailure {
  SchedulerKind scheduler;
  double target_rate;
  std::size_t rep;
  std::string error;
};

struct SweepOutput {
  std::vector<double> rates;
  /// Rep-averaged points per scheduler, sorted by rate. Cells whose every
  /// repetition failed are missing.
  std::map<SchedulerKind, std::vector<SweepPoint>> points;
  std::vector<SweepFailure> failures;
  std::size_t simulations = 0;
};

inline std::size_t default_reps(SchedulerKind k) { return k == SchedulerKind::cp ? 3 : 10; }

/// Runs every (scheduler, rate, rep) cell as an independent simulation on up
/// to `jobs` threads; results are collected in a fixed order.
inline SweepOutput run_sweep(const Platform& platform, const WorkloadSpec& base,
                             std::span<const SchedulerKind> kinds, std::vector<double> rates,
                             const SweepOptions& opt = {}) {
  if (rates.empty()) throw ModelError("sweep: no target rates");
  std::sort(rates.begin(), rates.end());
  struct Cell {
    std::size_t sched;
    std::size_t rate;
    std::size_t rep;
    std::optional<SweepPoint> point;
    std::string error;
  };
  std::vector<Cell> cells;
  for (std::size_t s = 0; s < kinds.size(); ++s) {
    std::size_t reps = opt.reps.value_or(default_reps(kinds[s]));
    for (std::size_t r = 0; r < rates.size(); ++r) {
      for (std::size_t k = 0; k < reps; ++k) cells.push_back({s, r, k, std::nullopt, {}});
    }
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      Cell& c = cells[i];
      WorkloadSpec w = base;
      w.target_frame_rate = rates[c.rate];
      SimConfig cfg = opt.sim;
      cfg.seed = opt.base_seed + c.rep;
      try {
        SimResult res = run(platform, w, kinds[c.sched], cfg);
        c.point = sweep_point(res, platform, kinds[c.sched]);
      } catch (const std::exception& e) {
        c.error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t j = 1; j < std::max<std::size_t>(opt.jobs, 1); ++j) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  SweepOutput out;
  out.rates = rates;
  out.simulations = cells.size();
  for (std::size_t s = 0; s < kinds.size(); ++s) {
    auto& pts = out.points[kinds[s]];
    for (std::size_t r = 0; r < rates.size(); ++r) {
      std::vector<SweepPoint> reps;
      for (const Cell& c : cells) {
        if (c.sched != s || c.rate != r) continue;
        if (c.point) {
          reps.push_back(*c.point);
        } else {
          out.failures.push_back({kinds[s], rates[r], c.rep, c.error});
        }
      }
      if (!reps.empty()) pts.push_back(average(reps));
    }
  }
  return out;
}

}  // namespace hetsched
