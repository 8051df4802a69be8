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
#include <cstdio>
#include <map>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hetsched/model.hpp"
#include "hetsched/sched_list.hpp"
#include "hetsched/sim_engine.hpp"

namespace hetsched {

/// Frames completed by `duration`, per unit time. Frames finishing during
/// the drain do not count.
inline double achieved_rate(const SimResult& r) {
  if (!(r.duration > 0.0)) return 0.0;
  std::size_t done = 0;
  for (const FrameRecord& f : r.frames) {
    if (f.completion && *f.completion <= r.duration) ++done;
  }
  return static_cast<double>(done) / r.duration;
}

inline std::size_t completed_frames(const SimResult& r) {
  std::size_t n = 0;
  for (const FrameRecord& f : r.frames) n += f.completion ? 1 : 0;
  return n;
}

/// Mean of (completion - injection) over every completed frame, drain
/// included.
inline Time avg_frame_exec(const SimResult& r) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const FrameRecord& f : r.frames) {
    if (!f.completion) continue;
    sum += *f.completion - f.injection;
    ++n;
  }
  if (n == 0) throw std::invalid_argument("avg_frame_exec: no completed frames");
  return sum / static_cast<double>(n);
}

inline Energy total_energy(const SimResult& r, const Platform& platform) {
  return compute_energy(r.pe_busy, platform, r.duration);
}

struct SweepPoint {
  SchedulerKind scheduler = SchedulerKind::heft_rt;
  double target_rate = 0.0;
  double achieved_rate = 0.0;
  Time avg_exec = 0.0;
  double energy_dynamic = 0.0;
  double energy_static = 0.0;
  double energy_total = 0.0;
  double energy_per_frame = 0.0;
};

inline SweepPoint sweep_point(const SimResult& r, const Platform& platform, SchedulerKind kind) {
  SweepPoint p;
  p.scheduler = kind;
  p.target_rate = r.target_rate;
  p.achieved_rate = achieved_rate(r);
  p.avg_exec = completed_frames(r) == 0 ? 0.0 : avg_frame_exec(r);
  Energy e = total_energy(r, platform);
  p.energy_dynamic = e.dynamic;
  p.energy_static = e.idle;
  p.energy_total = e.total();
  std::size_t n = completed_frames(r);
  p.energy_per_frame = n == 0 ? 0.0 : e.total() / static_cast<double>(n);
  return p;
}

/// Field-wise mean of repetitions of one sweep cell.
inline SweepPoint average(std::span<const SweepPoint> reps) {
  if (reps.empty()) throw std::invalid_argument("average: no repetitions");
  SweepPoint m;
  m.scheduler = reps.front().scheduler;
  m.target_rate = reps.front().target_rate;
  for (const SweepPoint& p : reps) {
    m.achieved_rate += p.achieved_rate;
    m.avg_exec += p.avg_exec;
    m.energy_dynamic += p.energy_dynamic;
    m.energy_static += p.energy_static;
    m.energy_total += p.energy_total;
    m.energy_per_frame += p.energy_per_frame;
  }
  double n = static_cast<double>(reps.size());
  m.achieved_rate /= n;
  m.avg_exec /= n;
  m.energy_dynamic /= n;
  m.energy_static /= n;
  m.energy_total /= n;
  m.energy_per_frame /= n;
  return m;
}

struct Saturation {
  double rate = 0.0;
  /// No point kept up with its target; `rate` is then the best achieved.
  bool saturated_everywhere = false;
};

/// Largest achieved rate among points still tracking their target within
/// `tol`.
inline Saturation saturation_point(std::span<const SweepPoint> sweep, double tol = 0.05) {
  if (sweep.size() < 2) throw std::invalid_argument("saturation_point: need at least 2 points");
  for (std::size_t i = 1; i < sweep.size(); ++i) {
    if (sweep[i].target_rate < sweep[i - 1].target_rate) {
      throw std::invalid_argument("saturation_point: sweep not sorted by target rate");
    }
  }
  Saturation s;
  bool any = false;
  double best_any = 0.0;
  for (const SweepPoint& p : sweep) {
    best_any = std::max(best_any, p.achieved_rate);
    if (p.achieved_rate >= (1.0 - tol) * p.target_rate) {
      s.rate = any ? std::max(s.rate, p.achieved_rate) : p.achieved_rate;
      any = true;
    }
  }
  if (!any) {
    s.rate = best_any;
    s.saturated_everywhere = true;
  }
  return s;
}

struct Improvement {
  double avg = 0.0;
  double max = 0.0;
};

/// AVG and MAX over the grid of 100 * (base - x) / base.
inline Improvement improvement(std::span<const double> base, std::span<const double> x) {
  if (base.size() != x.size() || base.empty()) {
    throw std::invalid_argument("improvement: grids differ in size");
  }
  Improvement imp;
  imp.max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < base.size(); ++i) {
    double v = base[i] == 0.0 ? 0.0 : 100.0 * (base[i] - x[i]) / base[i];
    imp.avg += v;
    imp.max = std::max(imp.max, v);
  }
  imp.avg /= static_cast<double>(base.size());
  return imp;
}

struct ImprovementRow {
  SchedulerKind base;
  SchedulerKind other;
  Improvement exec_time;
  Improvement energy;
};

/// Every ordered pair (base, other) of schedulers over a shared rate grid.
inline std::vector<ImprovementRow> improvement_table(
    const std::map<SchedulerKind, std::vector<SweepPoint>>& results) {
  std::vector<ImprovementRow> rows;
  for (const auto& [b, bs] : results) {
    for (const auto& [o, os] : results) {
      if (b == o) continue;
      if (bs.size() != os.size()) throw std::invalid_argument("improvement_table: grid mismatch");
      std::vector<double> be, oe, bj, oj;
      for (std::size_t i = 0; i < bs.size(); ++i) {
        if (bs[i].target_rate != os[i].target_rate) {
          throw std::invalid_argument("improvement_table: grid mismatch");
        }
        be.push_back(bs[i].avg_exec);
        oe.push_back(os[i].avg_exec);
        bj.push_back(bs[i].energy_total);
        oj.push_back(os[i].energy_total);
      }
      rows.push_back({b, o, improvement(be, oe), improvement(bj, oj)});
    }
  }
  return rows;
}

inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline constexpr const char* kSweepCsvHeader =
    "scheduler,target_rate,achieved_rate,avg_exec,energy_dynamic,energy_static,energy_total,"
    "energy_per_frame";

inline void write_csv_row(std::ostream& os, const SweepPoint& p) {
  os << to_string(p.scheduler) << ',' << format_number(p.target_rate) << ','
     << format_number(p.achieved_rate) << ',' << format_number(p.avg_exec) << ','
     << format_number(p.energy_dynamic) << ',' << format_number(p.energy_static) << ','
     << format_number(p.energy_total) << ',' << format_number(p.energy_per_frame) << '\n';
}

inline void write_csv(std::ostream& os, std::span<const SweepPoint> points) {
  os << kSweepCsvHeader << '\n';
  for (const SweepPoint& p : points) write_csv_row(os, p);
}

inline void write_improvement_csv(std::ostream& os, std::span<const ImprovementRow> rows) {
  os << "base,other,exec_avg_pct,exec_max_pct,energy_avg_pct,energy_max_pct\n";
  for (const ImprovementRow& r : rows) {
    os << to_string(r.base) << ',' << to_string(r.other) << ',' << format_number(r.exec_time.avg)
       << ',' << format_number(r.exec_time.max) << ',' << format_number(r.energy.avg) << ','
       << format_number(r.energy.max) << '\n';
  }
}

}  // namespace hetsched
