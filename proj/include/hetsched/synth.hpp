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
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hetsched/model.hpp"
#include "hetsched/random.hpp"

namespace hetsched {

/// Per-PE generator settings: relative speed, dynamic power draw, idle power.
struct SynthPeModel {
  PeKind kind = PeKind::cpu;
  double speed = 1.0;
  Watts power = 1.0;
  Watts idle_power = 0.0;
};

struct SynthParams {
  int n_tasks = 10;
  int width = 3;
  int n_pes = 3;
  /// 0 gives identical per-PE times for identical PE models; 1 spreads them
  /// by +/-50% around base / speed.
  double heterogeneity = 0.5;
  std::uint64_t seed = 1;
  /// Empty means n_pes identical CPUs.
  std::vector<SynthPeModel> pe_models;
  /// Probability that an accelerator PE can run a given task.
  double accel_support = 0.35;
  Time min_cost = 10.0;
  Time max_cost = 50.0;
  double min_volume = 0.0;
  double max_volume = 20.0;
  /// Probability of an extra parent edge from an earlier layer.
  double extra_edge = 0.2;
};

/// Layered random DAG with one entry and one exit node. Execution times are
/// whole time-units so schedule arithmetic stays exact.
inline AppDag synth_profile(const SynthParams& p) {
  if (p.n_tasks < 2) throw ModelError("n_tasks: need at least 2 tasks");
  if (p.n_pes < 1) throw ModelError("n_pes: need at least 1 PE");
  if (p.width < 1) throw ModelError("width: must be >= 1");
  if (!(p.heterogeneity >= 0.0) || p.heterogeneity > 1.0) {
    throw ModelError("heterogeneity: must lie in [0, 1]");
  }
  if (!(p.min_cost > 0.0) || p.max_cost < p.min_cost) {
    throw ModelError("cost range: need 0 < min_cost <= max_cost");
  }
  if (!(p.min_volume >= 0.0) || p.max_volume < p.min_volume) {
    throw ModelError("volume range: need 0 <= min_volume <= max_volume");
  }
  std::vector<SynthPeModel> models = p.pe_models;
  if (models.empty()) models.assign(static_cast<std::size_t>(p.n_pes), SynthPeModel{});
  if (models.size() != static_cast<std::size_t>(p.n_pes)) {
    throw ModelError("pe_models: expected " + std::to_string(p.n_pes) + " entries");
  }

  Rng rng(p.seed);
  auto n = static_cast<std::size_t>(p.n_tasks);

  // Layer assignment: entry, middle layers of 1..width nodes, exit.
  std::vector<std::vector<std::size_t>> layers{{0}};
  std::size_t next = 1;
  while (next < n - 1) {
    auto w = static_cast<std::size_t>(rng.uniform_int(1, p.width));
    w = std::min(w, n - 1 - next);
    std::vector<std::size_t> layer;
    for (std::size_t i = 0; i < w; ++i) layer.push_back(next++);
    layers.push_back(std::move(layer));
  }
  layers.push_back({n - 1});

  auto volume = [&] {
    return static_cast<double>(rng.uniform_int(static_cast<std::int64_t>(p.min_volume),
                                               static_cast<std::int64_t>(p.max_volume)));
  };
  std::vector<std::vector<bool>> linked(n, std::vector<bool>(n, false));
  std::vector<bool> has_child(n, false);
  std::vector<Edge> edges;
  auto add_edge = [&](std::size_t s, std::size_t d) {
    if (linked[s][d]) return;
    linked[s][d] = true;
    has_child[s] = true;
    edges.push_back({static_cast<int>(s) + 1, static_cast<int>(d) + 1, volume()});
  };
  for (std::size_t l = 1; l < layers.size(); ++l) {
    const auto& prev = layers[l - 1];
    for (std::size_t v : layers[l]) {
      add_edge(prev[static_cast<std::size_t>(rng.uniform_int(0, std::int64_t(prev.size()) - 1))], v);
      if (l >= 2 && rng.uniform() < p.extra_edge) {
        auto el = static_cast<std::size_t>(rng.uniform_int(0, std::int64_t(l) - 2));
        const auto& early = layers[el];
        add_edge(early[static_cast<std::size_t>(rng.uniform_int(0, std::int64_t(early.size()) - 1))], v);
      }
    }
  }
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    const auto& nxt = layers[l + 1];
    for (std::size_t v : layers[l]) {
      if (!has_child[v]) {
        add_edge(v, nxt[static_cast<std::size_t>(rng.uniform_int(0, std::int64_t(nxt.size()) - 1))]);
      }
    }
  }

  std::vector<TaskNode> tasks;
  tasks.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    TaskNode t;
    t.id = static_cast<int>(i) + 1;
    t.name = "t" + std::to_string(i + 1);
    double base = rng.uniform(p.min_cost, p.max_cost);
    bool any = false;
    for (const SynthPeModel& m : models) {
      bool supported = m.kind == PeKind::cpu || rng.uniform() < p.accel_support;
      double spread = rng.uniform(-0.5, 0.5);
      double draw = rng.uniform(0.8, 1.2);
      if (!supported) {
        t.exec_time.emplace_back();
        t.power.emplace_back();
        continue;
      }
      any = true;
      double w = std::max(1.0, std::round(base / m.speed * (1.0 + p.heterogeneity * spread)));
      t.exec_time.emplace_back(w);
      t.power.emplace_back(std::round(m.power * draw * 100.0) / 100.0);
    }
    if (!any) {
      auto k = static_cast<std::size_t>(rng.uniform_int(0, std::int64_t(models.size()) - 1));
      t.exec_time[k] = std::max(1.0, std::round(base / models[k].speed));
      t.power[k] = models[k].power;
    }
    tasks.push_back(std::move(t));
  }
  return AppDag("synth-" + std::to_string(p.seed), std::move(tasks), std::move(edges));
}

/// A small heterogeneous SoC: two fast power-hungry cores, two slow frugal
/// cores and two accelerators that run only part of the task set.
inline std::vector<SynthPeModel> soc_models() {
  return {
      {PeKind::cpu, 1.5, 2.0, 0.1},         {PeKind::cpu, 1.5, 2.0, 0.1},
      {PeKind::cpu, 0.6, 0.4, 0.02},        {PeKind::cpu, 0.6, 0.4, 0.02},
      {PeKind::accelerator, 4.0, 0.8, 0.05}, {PeKind::accelerator, 4.0, 0.8, 0.05},
  };
}

/// Platform matching a list of generator PE models, uniform link bandwidth.
inline Platform synth_platform(std::span<const SynthPeModel> models, double bandwidth = 1.0,
                               std::string name = "synth") {
  std::vector<ProcessingElement> pes;
  for (std::size_t k = 0; k < models.size(); ++k) {
    std::string prefix = models[k].kind == PeKind::cpu ? "cpu" : "acc";
    pes.push_back({static_cast<int>(k), prefix + std::to_string(k), models[k].kind,
                   models[k].idle_power});
  }
  return Platform::uniform(std::move(name), std::move(pes), bandwidth);
}

}  // namespace hetsched
