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

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hetsched/graph.hpp"

namespace hetsched {

/// Abstract time unit. Experiment configs decide what one unit means.
using Time = double;
using Watts = double;

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CycleError : public ModelError {
 public:
  using ModelError::ModelError;
};

enum class PeKind { cpu, accelerator };

inline std::string_view to_string(PeKind kind) {
  return kind == PeKind::cpu ? "cpu" : "accelerator";
}

inline PeKind pe_kind_from_string(std::string_view s) {
  if (s == "cpu") return PeKind::cpu;
  if (s == "accelerator") return PeKind::accelerator;
  throw ModelError("pes[].kind: unknown PE kind '" + std::string(s) + "'");
}

struct ProcessingElement {
  int id = 0;
  std::string name;
  PeKind kind = PeKind::cpu;
  Watts idle_power = 0.0;
};

/// A set of PEs plus the pairwise link bandwidth matrix. Intra-PE transfers
/// are free; the diagonal of the matrix is ignored.
class Platform {
 public:
  Platform() = default;

  Platform(std::string name, std::vector<ProcessingElement> pes,
           std::vector<std::vector<double>> link_bandwidth)
      : name_(std::move(name)), pes_(std::move(pes)), bandwidth_(std::move(link_bandwidth)) {
    validate();
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t a = 0; a < size(); ++a) {
      for (std::size_t b = 0; b < size(); ++b) {
        if (a == b) continue;
        sum += bandwidth_[a][b];
        ++count;
      }
    }
    mean_bandwidth_ = count == 0 ? 0.0 : sum / static_cast<double>(count);
  }

  /// z PEs, all links at `bandwidth`.
  static Platform uniform(std::string name, std::vector<ProcessingElement> pes,
                          double bandwidth = 1.0) {
    std::size_t z = pes.size();
    std::vector<std::vector<double>> bw(z, std::vector<double>(z, bandwidth));
    for (std::size_t k = 0; k < z; ++k) bw[k][k] = 0.0;
    return Platform(std::move(name), std::move(pes), std::move(bw));
  }

  [[nodiscard]] const std::string& name() const { return name_; }
  [[nodiscard]] std::size_t size() const { return pes_.size(); }
  [[nodiscard]] std::span<const ProcessingElement> pes() const { return pes_; }
  [[nodiscard]] const ProcessingElement& pe(std::size_t k) const { return pes_.at(k); }
  [[nodiscard]] const std::vector<std::vector<double>>& link_bandwidth() const {
    return bandwidth_;
  }

  [[nodiscard]] double bandwidth(std::size_t from, std::size_t to) const {
    if (from == to) return std::numeric_limits<double>::infinity();
    return bandwidth_[from][to];
  }

  /// Mean over the off-diagonal entries; 0 when z = 1.
  [[nodiscard]] double mean_link_bandwidth() const { return mean_bandwidth_; }

  /// Transfer time of `volume` from PE `from` to PE `to`.
  [[nodiscard]] Time comm_time(double volume, std::size_t from, std::size_t to) const {
    if (from == to || volume == 0.0) return 0.0;
    return volume / bandwidth_[from][to];
  }

 private:
  void validate() const {
    if (pes_.empty()) throw ModelError("pes: platform needs at least one PE");
    for (std::size_t k = 0; k < pes_.size(); ++k) {
      if (pes_[k].id != static_cast<int>(k)) {
        throw ModelError("pes[" + std::to_string(k) + "].id: ids must be dense 0..z-1, got " +
                         std::to_string(pes_[k].id));
      }
      if (!(pes_[k].idle_power >= 0.0) || !std::isfinite(pes_[k].idle_power)) {
        throw ModelError("pes[" + std::to_string(k) + "].idle_power: must be finite and >= 0");
      }
    }
    if (bandwidth_.size() != pes_.size()) {
      throw ModelError("link_bandwidth: expected " + std::to_string(pes_.size()) + " rows");
    }
    for (std::size_t a = 0; a < pes_.size(); ++a) {
      if (bandwidth_[a].size() != pes_.size()) {
        throw ModelError("link_bandwidth[" + std::to_string(a) + "]: expected " +
                         std::to_string(pes_.size()) + " columns");
      }
      for (std::size_t b = 0; b < pes_.size(); ++b) {
        if (a == b) continue;
        std::string field =
            "link_bandwidth[" + std::to_string(a) + "][" + std::to_string(b) + "]";
        double v = bandwidth_[a][b];
        if (!(v > 0.0) || !std::isfinite(v)) throw ModelError(field + ": must be finite and > 0");
        if (v != bandwidth_[b][a]) {
          throw ModelError(field + ": asymmetric bandwidth (" + std::to_string(v) + " vs " +
                           std::to_string(bandwidth_[b][a]) + ")");
        }
      }
    }
  }

  std::string name_;
  std::vector<ProcessingElement> pes_;
  std::vector<std::vector<double>> bandwidth_;
  double mean_bandwidth_ = 0.0;
};

/// One node of an application DAG. `std::nullopt` marks a PE that cannot run
/// the task (single-function accelerators).
struct TaskNode {
  int id = 0;
  std::string name;
  std::vector<std::optional<Time>> exec_time;
  std::vector<std::optional<Watts>> power;
  /// Zero-cost bookkeeping node inserted by DAG merging; never dispatched.
  bool synthetic = false;

  [[nodiscard]] bool supports(std::size_t pe) const {
    return pe < exec_time.size() && exec_time[pe].has_value();
  }
  [[nodiscard]] Time exec_on(std::size_t pe) const { return exec_time.at(pe).value(); }
  [[nodiscard]] Watts power_on(std::size_t pe) const { return power.at(pe).value(); }
};

struct Edge {
  int src = 0;
  int dst = 0;
  double data_volume = 0.0;
};

/// Adjacency entry: neighbouring task index and the edge's data volume.
struct Link {
  std::size_t task;
  double volume;
};

/// Immutable application task graph. Construction validates every invariant
/// (unique ids, consistent support sets, acyclicity) and caches adjacency and
/// a deterministic topological order.
class AppDag {
 public:
  AppDag() = default;

  AppDag(std::string app_name, std::vector<TaskNode> tasks, std::vector<Edge> edges)
      : app_name_(std::move(app_name)), tasks_(std::move(tasks)), edges_(std::move(edges)) {
    build();
  }

  [[nodiscard]] const std::string& app_name() const { return app_name_; }
  [[nodiscard]] std::size_t size() const { return tasks_.size(); }
  [[nodiscard]] std::size_t num_pes() const { return num_pes_; }
  [[nodiscard]] std::span<const TaskNode> tasks() const { return tasks_; }
  [[nodiscard]] const TaskNode& task(std::size_t i) const { return tasks_.at(i); }
  [[nodiscard]] std::span<const Edge> edges() const { return edges_; }
  [[nodiscard]] std::span<const Link> successors(std::size_t i) const { return succ_.at(i); }
  [[nodiscard]] std::span<const Link> predecessors(std::size_t i) const { return pred_.at(i); }
  [[nodiscard]] std::span<const std::size_t> topological_order() const { return topo_; }

  [[nodiscard]] std::size_t index_of(int id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw ModelError("unknown task id " + std::to_string(id));
    return it->second;
  }
  [[nodiscard]] bool has_task(int id) const { return index_.contains(id); }

 private:
  void build() {
    if (tasks_.empty()) throw ModelError("tasks: DAG '" + app_name_ + "' has no tasks");
    num_pes_ = tasks_.front().exec_time.size();
    for (std::size_t i = 0; i < tasks_.size(); ++i) {
      const TaskNode& t = tasks_[i];
      std::string where = "tasks[" + std::to_string(i) + "] (id " + std::to_string(t.id) + ")";
      if (!index_.emplace(t.id, i).second) throw ModelError(where + ".id: duplicate task id");
      if (t.exec_time.size() != num_pes_ || t.power.size() != num_pes_) {
        throw ModelError(where + ": exec_time and power need " + std::to_string(num_pes_) +
                         " entries");
      }
      bool any = false;
      for (std::size_t k = 0; k < num_pes_; ++k) {
        if (t.exec_time[k].has_value() != t.power[k].has_value()) {
          throw ModelError(where + ": exec_time and power disagree on support of PE " +
                           std::to_string(k));
        }
        if (!t.exec_time[k]) continue;
        any = true;
        double w = *t.exec_time[k];
        bool ok_w = t.synthetic ? w >= 0.0 : w > 0.0;
        if (!ok_w || !std::isfinite(w)) {
          throw ModelError(where + ".exec_time[" + std::to_string(k) + "]: must be > 0");
        }
        if (!(*t.power[k] >= 0.0) || !std::isfinite(*t.power[k])) {
          throw ModelError(where + ".power[" + std::to_string(k) + "]: must be >= 0");
        }
      }
      if (!any) throw ModelError(where + ": task supports no PE");
    }
    succ_.assign(tasks_.size(), {});
    pred_.assign(tasks_.size(), {});
    std::vector<graph::Arc> arcs;
    arcs.reserve(edges_.size());
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      const Edge& edge = edges_[e];
      std::string where = "edges[" + std::to_string(e) + "]";
      if (!index_.contains(edge.src)) throw ModelError(where + ".src: unknown task id");
      if (!index_.contains(edge.dst)) throw ModelError(where + ".dst: unknown task id");
      if (edge.src == edge.dst) throw ModelError(where + ": self-edge");
      if (!(edge.data_volume >= 0.0) || !std::isfinite(edge.data_volume)) {
        throw ModelError(where + ".data_volume: must be >= 0");
      }
      std::size_t s = index_.at(edge.src);
      std::size_t d = index_.at(edge.dst);
      succ_[s].push_back({d, edge.data_volume});
      pred_[d].push_back({s, edge.data_volume});
      arcs.emplace_back(s, d);
    }
    auto order = graph::topological_order(tasks_.size(), arcs);
    if (!order) {
      std::string ids;
      for (std::size_t v : graph::cyclic_residue(tasks_.size(), arcs)) {
        if (!ids.empty()) ids += ", ";
        ids += std::to_string(tasks_[v].id);
      }
      throw CycleError("DAG '" + app_name_ + "' has a cycle through tasks {" + ids + "}");
    }
    topo_ = std::move(*order);
  }

  std::string app_name_;
  std::vector<TaskNode> tasks_;
  std::vector<Edge> edges_;
  std::size_t num_pes_ = 0;
  std::unordered_map<int, std::size_t> index_;
  std::vector<std::vector<Link>> succ_;
  std::vector<std::vector<Link>> pred_;
  std::vector<std::size_t> topo_;
};

/// Mean execution time over the PEs that support the task.
inline Time mean_exec_time(const TaskNode& task) {
  double sum = 0.0;
  int n = 0;
  for (const auto& w : task.exec_time) {
    if (!w) continue;
    sum += *w;
    ++n;
  }
  return n == 0 ? 0.0 : sum / n;
}

/// Mean power over the PEs that support the task.
inline Watts mean_power(const TaskNode& task) {
  double sum = 0.0;
  int n = 0;
  for (const auto& p : task.power) {
    if (!p) continue;
    sum += *p;
    ++n;
  }
  return n == 0 ? 0.0 : sum / n;
}

inline Time avg_comm_cost(double data_volume, const Platform& platform) {
  if (platform.size() < 2 || data_volume == 0.0) return 0.0;
  return data_volume / platform.mean_link_bandwidth();
}

inline Time avg_comm_cost(const Edge& edge, const Platform& platform) {
  return avg_comm_cost(edge.data_volume, platform);
}

/// Throws ModelError when the DAG's cost tables do not match the platform.
inline void check_compatible(const AppDag& dag, const Platform& platform) {
  if (dag.num_pes() != platform.size()) {
    throw ModelError("DAG '" + dag.app_name() + "' has cost tables for " +
                     std::to_string(dag.num_pes()) + " PEs but platform '" + platform.name() +
                     "' has " + std::to_string(platform.size()));
  }
}

enum class ArrivalDistribution { exponential, fixed };

inline std::string_view to_string(ArrivalDistribution d) {
  return d == ArrivalDistribution::exponential ? "exponential" : "fixed";
}

inline ArrivalDistribution arrival_distribution_from_string(std::string_view s) {
  if (s == "exponential") return ArrivalDistribution::exponential;
  if (s == "fixed") return ArrivalDistribution::fixed;
  throw ModelError("arrival_distribution: unknown value '" + std::string(s) + "'");
}

struct MixEntry {
  std::shared_ptr<const AppDag> dag;
  double probability = 1.0;
};

/// Frame injection recipe. The first frame arrives at t = 0; subsequent
/// inter-arrival gaps have mean 1 / target_frame_rate.
struct WorkloadSpec {
  std::vector<MixEntry> mix;
  double target_frame_rate = 1.0;
  Time duration = 0.0;
  ArrivalDistribution arrival_distribution = ArrivalDistribution::exponential;
  std::uint64_t seed = 0;
  /// Optional hard cap on injected frames.
  std::optional<std::size_t> max_frames;

  void validate() const {
    if (mix.empty()) throw ModelError("mix: workload needs at least one application");
    double total = 0.0;
    for (std::size_t i = 0; i < mix.size(); ++i) {
      if (!mix[i].dag) throw ModelError("mix[" + std::to_string(i) + "].dag: missing DAG");
      if (!(mix[i].probability >= 0.0)) {
        throw ModelError("mix[" + std::to_string(i) + "].probability: must be >= 0");
      }
      total += mix[i].probability;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw ModelError("mix: probabilities sum to " + std::to_string(total) + ", expected 1");
    }
    if (!(target_frame_rate > 0.0) || !std::isfinite(target_frame_rate)) {
      throw ModelError("target_frame_rate: must be > 0");
    }
    if (!(duration >= 0.0) || !std::isfinite(duration)) {
      throw ModelError("duration: must be >= 0");
    }
  }
};

}  // namespace hetsched
