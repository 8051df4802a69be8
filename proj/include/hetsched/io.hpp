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

#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hetsched/model.hpp"

namespace hetsched::io {

using nlohmann::json;

class ParseError : public ModelError {
 public:
  using ModelError::ModelError;
};

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string() + ": cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": malformed document: " + e.what());
  }
}

namespace detail {

inline const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + "." + key + ": missing field");
  return *it;
}

inline double number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ParseError(where + ": expected a number");
  return v.get<double>();
}

inline int integer(const json& v, const std::string& where) {
  if (!v.is_number_integer()) throw ParseError(where + ": expected an integer");
  return v.get<int>();
}

inline std::string string(const json& v, const std::string& where) {
  if (!v.is_string()) throw ParseError(where + ": expected a string");
  return v.get<std::string>();
}

inline std::vector<std::optional<double>> optional_row(const json& v, const std::string& where) {
  if (!v.is_array()) throw ParseError(where + ": expected an array");
  std::vector<std::optional<double>> row;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (v[k].is_null()) {
      row.emplace_back();
    } else {
      row.emplace_back(number(v[k], where + "[" + std::to_string(k) + "]"));
    }
  }
  return row;
}

inline json optional_row_json(const std::vector<std::optional<double>>& row) {
  json out = json::array();
  for (const auto& v : row) out.push_back(v ? json(*v) : json(nullptr));
  return out;
}

}  // namespace detail

inline Platform platform_from_json(const json& doc) {
  using namespace detail;
  std::string name = doc.contains("name") ? string(doc["name"], "name") : "platform";
  const json& pes_json = require(doc, "pes", "platform");
  if (!pes_json.is_array()) throw ParseError("pes: expected an array");
  std::vector<ProcessingElement> pes;
  for (std::size_t k = 0; k < pes_json.size(); ++k) {
    std::string where = "pes[" + std::to_string(k) + "]";
    const json& pe = pes_json[k];
    ProcessingElement out;
    out.id = integer(require(pe, "id", where), where + ".id");
    out.name = pe.contains("name") ? string(pe["name"], where + ".name") : "pe" + std::to_string(k);
    out.kind = pe.contains("kind") ? pe_kind_from_string(string(pe["kind"], where + ".kind"))
                                   : PeKind::cpu;
    out.idle_power = pe.contains("idle_power") ? number(pe["idle_power"], where + ".idle_power")
                                               : 0.0;
    pes.push_back(std::move(out));
  }
  const json& bw_json = require(doc, "link_bandwidth", "platform");
  if (!bw_json.is_array()) throw ParseError("link_bandwidth: expected an array of rows");
  std::vector<std::vector<double>> bw;
  for (std::size_t a = 0; a < bw_json.size(); ++a) {
    std::string where = "link_bandwidth[" + std::to_string(a) + "]";
    if (!bw_json[a].is_array()) throw ParseError(where + ": expected an array");
    std::vector<double> row;
    for (std::size_t b = 0; b < bw_json[a].size(); ++b) {
      const json& cell = bw_json[a][b];
      // The diagonal is semantically infinite; accept null or any number there.
      if (a == b && (cell.is_null() || cell.is_number())) {
        row.push_back(0.0);
        continue;
      }
      row.push_back(number(cell, where + "[" + std::to_string(b) + "]"));
    }
    bw.push_back(std::move(row));
  }
  return Platform(std::move(name), std::move(pes), std::move(bw));
}

inline json to_json(const Platform& platform) {
  json pes = json::array();
  for (const auto& pe : platform.pes()) {
    pes.push_back({{"id", pe.id},
                   {"name", pe.name},
                   {"kind", std::string(to_string(pe.kind))},
                   {"idle_power", pe.idle_power}});
  }
  json bw = json::array();
  for (std::size_t a = 0; a < platform.size(); ++a) {
    json row = json::array();
    for (std::size_t b = 0; b < platform.size(); ++b) {
      row.push_back(a == b ? json(nullptr) : json(platform.link_bandwidth()[a][b]));
    }
    bw.push_back(std::move(row));
  }
  return {{"name", platform.name()}, {"pes", std::move(pes)}, {"link_bandwidth", std::move(bw)}};
}

inline AppDag dag_from_json(const json& doc) {
  using namespace detail;
  std::string name = string(require(doc, "app_name", "dag"), "app_name");
  const json& tasks_json = require(doc, "tasks", "dag");
  if (!tasks_json.is_array()) throw ParseError("tasks: expected an array");
  std::vector<TaskNode> tasks;
  for (std::size_t i = 0; i < tasks_json.size(); ++i) {
    std::string where = "tasks[" + std::to_string(i) + "]";
    const json& t = tasks_json[i];
    TaskNode out;
    out.id = integer(require(t, "id", where), where + ".id");
    out.name = t.contains("name") ? string(t["name"], where + ".name")
                                  : "t" + std::to_string(out.id);
    out.exec_time = optional_row(require(t, "exec_time", where), where + ".exec_time");
    out.power = optional_row(require(t, "power", where), where + ".power");
    tasks.push_back(std::move(out));
  }
  std::vector<Edge> edges;
  if (doc.contains("edges")) {
    const json& edges_json = doc["edges"];
    if (!edges_json.is_array()) throw ParseError("edges: expected an array");
    for (std::size_t e = 0; e < edges_json.size(); ++e) {
      std::string where = "edges[" + std::to_string(e) + "]";
      const json& ej = edges_json[e];
      edges.push_back({integer(require(ej, "src", where), where + ".src"),
                       integer(require(ej, "dst", where), where + ".dst"),
                       number(require(ej, "data_volume", where), where + ".data_volume")});
    }
  }
  return AppDag(std::move(name), std::move(tasks), std::move(edges));
}

inline json to_json(const AppDag& dag) {
  json tasks = json::array();
  for (const auto& t : dag.tasks()) {
    tasks.push_back({{"id", t.id},
                     {"name", t.name},
                     {"exec_time", detail::optional_row_json(t.exec_time)},
                     {"power", detail::optional_row_json(t.power)}});
  }
  json edges = json::array();
  for (const auto& e : dag.edges()) {
    edges.push_back({{"src", e.src}, {"dst", e.dst}, {"data_volume", e.data_volume}});
  }
  return {{"app_name", dag.app_name()}, {"tasks", std::move(tasks)}, {"edges", std::move(edges)}};
}

inline Platform load_platform(const std::filesystem::path& path) {
  json doc = read_json_file(path);
  try {
    return platform_from_json(doc);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const ModelError& e) {
    throw ModelError(path.string() + ": " + e.what());
  }
}

inline AppDag load_dag(const std::filesystem::path& path) {
  json doc = read_json_file(path);
  try {
    return dag_from_json(doc);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const ModelError& e) {
    throw ModelError(path.string() + ": " + e.what());
  }
}

/// Workload document:
///   {target_frame_rate, duration, arrival_distribution?, seed?, max_frames?,
///    mix: [{dag: <path relative to the workload file> | <inline dag>, probability}]}
inline WorkloadSpec workload_from_json(const json& doc, const std::filesystem::path& base_dir) {
  using namespace detail;
  WorkloadSpec spec;
  spec.target_frame_rate =
      number(require(doc, "target_frame_rate", "workload"), "target_frame_rate");
  spec.duration = number(require(doc, "duration", "workload"), "duration");
  if (doc.contains("arrival_distribution")) {
    spec.arrival_distribution = arrival_distribution_from_string(
        string(doc["arrival_distribution"], "arrival_distribution"));
  }
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned() && !doc["seed"].is_number_integer()) {
      throw ParseError("seed: expected an integer");
    }
    spec.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("max_frames")) {
    spec.max_frames = static_cast<std::size_t>(integer(doc["max_frames"], "max_frames"));
  }
  const json& mix = require(doc, "mix", "workload");
  if (!mix.is_array()) throw ParseError("mix: expected an array");
  for (std::size_t i = 0; i < mix.size(); ++i) {
    std::string where = "mix[" + std::to_string(i) + "]";
    const json& entry = mix[i];
    const json& dag = require(entry, "dag", where);
    MixEntry out;
    if (dag.is_string()) {
      std::filesystem::path p = dag.get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      out.dag = std::make_shared<const AppDag>(load_dag(p));
    } else {
      out.dag = std::make_shared<const AppDag>(dag_from_json(dag));
    }
    out.probability = entry.contains("probability")
                          ? number(entry["probability"], where + ".probability")
                          : 1.0;
    spec.mix.push_back(std::move(out));
  }
  spec.validate();
  return spec;
}

inline WorkloadSpec load_workload(const std::filesystem::path& path) {
  json doc = read_json_file(path);
  try {
    return workload_from_json(doc, path.parent_path());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const ModelError& e) {
    throw ModelError(path.string() + ": " + e.what());
  }
}

inline void write_json_file(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw ModelError(path.string() + ": cannot write file");
  out << doc.dump(2) << '\n';
}

}  // namespace hetsched::io
