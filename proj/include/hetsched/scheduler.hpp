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

#include <memory>
#include <optional>
#include <vector>

#include "hetsched/cp_solver.hpp"
#include "hetsched/model.hpp"
#include "hetsched/sched_core.hpp"
#include "hetsched/sched_list.hpp"

namespace hetsched {

class InfeasibleError : public ModelError {
 public:
  using ModelError::ModelError;
};

struct SchedulerOptions {
  HeftDynOptions dyn;
  CpOptions cp;
};

/// Uniform entry point for the simulator. Whole-DAG schedulers answer
/// on_arrival with a lookup table; ready-queue schedulers answer on_ready
/// with assignments for every ready task. The table returned by on_arrival
/// replaces the plan of every task it names.
class Scheduler {
 public:
  Scheduler(SchedulerKind kind, const Platform& platform) : kind_(kind), platform_(&platform) {}
  virtual ~Scheduler() = default;

  [[nodiscard]] SchedulerKind kind() const { return kind_; }
  [[nodiscard]] InvocationMode mode() const { return mode_of(kind_); }
  /// Whether on_arrival re-plans the outstanding frames (true) or only the
  /// incoming one.
  [[nodiscard]] virtual bool replans_outstanding() const { return false; }

  virtual ScheduleTable on_arrival(const SchedulerInput&, const DagInstance&) { return {}; }
  virtual std::vector<Assignment> on_ready(const SchedulerInput&) { return {}; }
  virtual void on_frame_done(int /*instance*/) {}

 protected:
  [[nodiscard]] const Platform& platform() const { return *platform_; }

 private:
  SchedulerKind kind_;
  const Platform* platform_;
};

namespace detail {

class HeftBaseScheduler final : public Scheduler {
 public:
  using Scheduler::Scheduler;
  ScheduleTable on_arrival(const SchedulerInput& in, const DagInstance& incoming) override {
    return heft_base(*incoming.dag, platform(), in.now, incoming.instance);
  }
};

class PeftBaseScheduler final : public Scheduler {
 public:
  using Scheduler::Scheduler;
  ScheduleTable on_arrival(const SchedulerInput& in, const DagInstance& incoming) override {
    return peft_base(*incoming.dag, platform(), in.now, incoming.instance);
  }
};

class HeftDynScheduler final : public Scheduler {
 public:
  HeftDynScheduler(SchedulerKind k, const Platform& p, HeftDynOptions o)
      : Scheduler(k, p), opt_(o) {}
  [[nodiscard]] bool replans_outstanding() const override { return opt_.merge; }
  ScheduleTable on_arrival(const SchedulerInput& in, const DagInstance& incoming) override {
    return heft_dyn(in, incoming, platform(), opt_);
  }

 private:
  HeftDynOptions opt_;
};

class CpScheduler final : public Scheduler {
 public:
  CpScheduler(SchedulerKind k, const Platform& p, CpOptions o) : Scheduler(k, p), opt_(o) {}
  [[nodiscard]] bool replans_outstanding() const override { return true; }
  ScheduleTable on_arrival(const SchedulerInput& in, const DagInstance& incoming) override {
    CpInstance inst;
    for (const DagInstance& d : in.outstanding) {
      if (d.instance != incoming.instance) inst.dags.push_back(d);
    }
    inst.dags.push_back(incoming);
    inst.running = in.running;
    inst.platform = &platform();
    inst.now = in.now;
    CpSolution sol = cp_solve(inst, opt_);
    if (sol.status == CpStatus::infeasible) {
      throw InfeasibleError("cp: no feasible assignment for frame " +
                            std::to_string(incoming.instance));
    }
    last_status_ = sol.status;
    return sol.table;
  }
  [[nodiscard]] std::optional<CpStatus> last_status() const { return last_status_; }

 private:
  CpOptions opt_;
  std::optional<CpStatus> last_status_;
};

template <auto Fn>
class ReadyQueueScheduler final : public Scheduler {
 public:
  using Scheduler::Scheduler;
  std::vector<Assignment> on_ready(const SchedulerInput& in) override { return Fn(in, platform()); }
};

class PeftRtScheduler final : public Scheduler {
 public:
  using Scheduler::Scheduler;
  ScheduleTable on_arrival(const SchedulerInput&, const DagInstance& incoming) override {
    cache_.get(incoming, platform());
    return {};
  }
  std::vector<Assignment> on_ready(const SchedulerInput& in) override {
    return peft_rt(in, platform(), cache_);
  }
  void on_frame_done(int instance) override { cache_.evict(instance); }

 private:
  OctCache cache_;
};

}  // namespace detail

inline std::unique_ptr<Scheduler> make_scheduler(SchedulerKind kind, const Platform& platform,
                                                 const SchedulerOptions& options = {}) {
  switch (kind) {
    case SchedulerKind::met:
      return std::make_unique<detail::ReadyQueueScheduler<met_schedule>>(kind, platform);
    case SchedulerKind::heft_base:
      return std::make_unique<detail::HeftBaseScheduler>(kind, platform);
    case SchedulerKind::heft_dyn:
      return std::make_unique<detail::HeftDynScheduler>(kind, platform, options.dyn);
    case SchedulerKind::heft_rt:
      return std::make_unique<detail::ReadyQueueScheduler<heft_rt>>(kind, platform);
    case SchedulerKind::heft_edp:
      return std::make_unique<detail::ReadyQueueScheduler<heft_edp>>(kind, platform);
    case SchedulerKind::heft_edp_lb:
      return std::make_unique<detail::ReadyQueueScheduler<heft_edp_lb>>(kind, platform);
    case SchedulerKind::peft_base:
      return std::make_unique<detail::PeftBaseScheduler>(kind, platform);
    case SchedulerKind::peft_rt:
      return std::make_unique<detail::PeftRtScheduler>(kind, platform);
    case SchedulerKind::cp:
      return std::make_unique<detail::CpScheduler>(kind, platform, options.cp);
  }
  throw ModelError("unknown scheduler kind");
}

}  // namespace hetsched
