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

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hetsched/canonical.hpp"
#include "hetsched/cp_solver.hpp"
#include "hetsched/io.hpp"
#include "hetsched/metrics.hpp"
#include "hetsched/model.hpp"
#include "hetsched/scheduler.hpp"
#include "hetsched/sim_engine.hpp"
#include "hetsched/sweep.hpp"
#include "hetsched/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hetsched;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitDeadlock = 2;
constexpr int kExitInfeasible = 3;

SchedulerKind parse_scheduler(const std::string& name) {
  auto k = scheduler_from_string(name);
  if (!k) throw ModelError("unknown scheduler '" + name + "'");
  return *k;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ModelError(path.string() + ": cannot write file");
  out << text;
}

json table_json(const ScheduleTable& table, std::span<const DagInstance> dags,
                const Platform& platform) {
  std::map<int, const AppDag*> by_id;
  for (const DagInstance& d : dags) by_id[d.instance] = d.dag;
  json rows = json::array();
  for (const auto& [k, a] : table.assignments) {
    const TaskNode& t = by_id.at(k.instance)->task(k.task);
    rows.push_back({{"dag", k.instance},
                    {"task", t.id},
                    {"name", t.name},
                    {"pe", platform.pe(a.pe).name},
                    {"start", a.start},
                    {"end", a.end}});
  }
  json deps = json::array();
  for (const auto& [a, b] : table.dynamic_deps) deps.push_back({to_string(a), to_string(b)});
  return {{"assignments", std::move(rows)}, {"dynamic_deps", std::move(deps)}};
}

// --- validate --------------------------------------------------------------

struct ValidateArgs {
  std::string platform;
  std::vector<std::string> dags;
  std::string workload;
};

int cmd_validate(const ValidateArgs& a) {
  Platform pf = io::load_platform(a.platform);
  for (const std::string& d : a.dags) {
    AppDag dag = io::load_dag(d);
    check_compatible(dag, pf);
  }
  if (!a.workload.empty()) {
    WorkloadSpec w = io::load_workload(a.workload);
    for (const MixEntry& m : w.mix) check_compatible(*m.dag, pf);
  }
  std::cout << "ok\n";
  return kExitOk;
}

// --- schedule --------------------------------------------------------------

struct ScheduleArgs {
  std::string platform;
  std::string dag;
  std::string scheduler = "heft_base";
  std::string out;
  double time_limit = 10.0;
  std::size_t max_branching = 0;
};

int cmd_schedule(const ScheduleArgs& a) {
  Platform pf = io::load_platform(a.platform);
  AppDag dag = io::load_dag(a.dag);
  check_compatible(dag, pf);
  SchedulerKind kind = parse_scheduler(a.scheduler);
  CpInstance inst = single_dag_instance(dag, pf);
  ScheduleTable table;
  std::optional<CpStatus> status;
  switch (kind) {
    case SchedulerKind::heft_base: table = heft_base(dag, pf); break;
    case SchedulerKind::peft_base: table = peft_base(dag, pf); break;
    case SchedulerKind::cp: {
      CpSolution sol = cp_solve(inst, {a.time_limit, a.max_branching});
      if (sol.status == CpStatus::infeasible) {
        std::cerr << "error: no feasible schedule\n";
        return kExitInfeasible;
      }
      table = sol.table;
      status = sol.status;
      break;
    }
    default:
      throw ModelError("schedule: scheduler must be heft_base, peft_base or cp");
  }
  auto violations = validate_schedule(table, inst.dags, pf, {});
  for (const Violation& v : violations) std::cerr << "violation: " << v.message << '\n';

  std::ostringstream makespan;
  makespan << format_number(table.makespan());
  json doc = table_json(table, inst.dags, pf);
  doc["scheduler"] = to_string(kind);
  doc["makespan"] = table.makespan();
  if (status) doc["status"] = to_string(*status);
  if (!a.out.empty()) {
    fs::create_directories(a.out);
    io::write_json_file(fs::path(a.out) / "schedule.json", doc);
    io::write_json_file(fs::path(a.out) / "gantt.json", to_json(gantt_of(table, pf, dag)));
    write_text(fs::path(a.out) / "makespan.txt", makespan.str() + "\n");
  }
  std::cout << "makespan " << makespan.str() << '\n';
  if (status) std::cout << "status " << to_string(*status) << '\n';
  return violations.empty() ? kExitOk : kExitInput;
}

// --- simulate --------------------------------------------------------------

struct SimulateArgs {
  std::string platform;
  std::string workload;
  std::string scheduler;
  std::optional<std::uint64_t> seed;
  std::optional<double> duration;
  std::optional<double> rate;
  double noise = 0.0;
  double time_limit = 10.0;
  std::size_t max_branching = 0;
  std::string time_unit = "us";
  std::string out;
  bool profile = false;
};

int cmd_simulate(const SimulateArgs& a) {
  Platform pf = io::load_platform(a.platform);
  WorkloadSpec w = io::load_workload(a.workload);
  SchedulerKind kind = parse_scheduler(a.scheduler);
  if (a.duration) w.duration = *a.duration;
  if (a.rate) w.target_frame_rate = *a.rate;
  if (a.seed) w.seed = *a.seed;
  w.validate();
  SimConfig cfg;
  cfg.noise = a.noise;
  cfg.time_unit = a.time_unit;
  cfg.scheduler.cp = {a.time_limit, a.max_branching};
  SimResult r = run(pf, w, kind, cfg);

  auto problems = check_execution(r, pf, w);
  for (const std::string& p : problems) std::cerr << "violation: " << p << '\n';

  SweepPoint pt = sweep_point(r, pf, kind);
  std::ostringstream csv;
  write_csv(csv, std::span<const SweepPoint>(&pt, 1));
  std::vector<std::shared_ptr<const AppDag>> apps;
  for (const MixEntry& m : w.mix) apps.push_back(m.dag);
  if (!a.out.empty()) {
    fs::create_directories(a.out);
    io::write_json_file(fs::path(a.out) / "result.json", to_json(r));
    io::write_json_file(fs::path(a.out) / "gantt.json", to_json(gantt_of(r, pf, apps)));
    write_text(fs::path(a.out) / "metrics.csv", csv.str());
    if (a.profile && !r.scheduler_calls.empty()) {
      OverheadProfile prof = profile_scheduler_overhead(r);
      json cdf = json::array();
      for (const auto& [d, f] : prof.cdf) cdf.push_back({d, f});
      io::write_json_file(fs::path(a.out) / "overhead.json",
                          {{"scheduler", r.scheduler},
                           {"unit", "s"},
                           {"mean", prof.mean},
                           {"p95", prof.p95},
                           {"count", prof.count},
                           {"total", prof.total},
                           {"cdf", std::move(cdf)}});
    }
  }
  std::cout << csv.str();
  std::cout << "frames " << r.frames.size() << " completed " << completed_frames(r) << '\n';
  std::cout << "validate " << (problems.empty() ? "ok" : "failed") << '\n';
  return problems.empty() ? kExitOk : kExitInput;
}

// --- sweep -----------------------------------------------------------------

struct SweepArgs {
  std::string platform;
  std::string workload;
  std::vector<std::string> schedulers;
  std::vector<double> rates;
  std::optional<std::size_t> reps;
  std::optional<double> duration;
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
  double time_limit = 10.0;
  std::size_t max_branching = 0;
  double tol = 0.05;
  std::string out;
};

int cmd_sweep(const SweepArgs& a) {
  Platform pf = io::load_platform(a.platform);
  WorkloadSpec base = io::load_workload(a.workload);
  if (a.duration) base.duration = *a.duration;
  std::vector<SchedulerKind> kinds;
  for (const std::string& s : a.schedulers) kinds.push_back(parse_scheduler(s));
  SweepOptions opt;
  opt.reps = a.reps;
  opt.base_seed = a.seed;
  opt.jobs = a.jobs;
  opt.sim.scheduler.cp = {a.time_limit, a.max_branching};
  SweepOutput out = run_sweep(pf, base, kinds, a.rates, opt);

  std::ostringstream csv, sat, imp, fails;
  csv << kSweepCsvHeader << '\n';
  sat << "scheduler,saturation_rate,saturated_everywhere\n";
  bool full = true;
  for (SchedulerKind k : kinds) {
    const auto& pts = out.points[k];
    full = full && pts.size() == out.rates.size();
    for (const SweepPoint& p : pts) write_csv_row(csv, p);
    if (pts.size() >= 2) {
      Saturation s = saturation_point(pts, a.tol);
      sat << to_string(k) << ',' << format_number(s.rate) << ','
          << (s.saturated_everywhere ? "true" : "false") << '\n';
    }
  }
  if (full && out.points.size() >= 2) write_improvement_csv(imp, improvement_table(out.points));
  fails << "scheduler,target_rate,rep,error\n";
  for (const SweepFailure& f : out.failures) {
    std::string msg = f.error.substr(0, f.error.find('\n'));
    std::replace(msg.begin(), msg.end(), ',', ';');
    fails << to_string(f.scheduler) << ',' << format_number(f.target_rate) << ',' << f.rep << ','
          << msg << '\n';
  }
  if (!a.out.empty()) {
    fs::create_directories(a.out);
    write_text(fs::path(a.out) / "sweep.csv", csv.str());
    write_text(fs::path(a.out) / "saturation.csv", sat.str());
    if (!imp.str().empty()) write_text(fs::path(a.out) / "improvement.csv", imp.str());
    if (!out.failures.empty()) write_text(fs::path(a.out) / "failures.csv", fails.str());
  }
  std::cout << csv.str() << sat.str();
  if (!out.failures.empty()) std::cerr << fails.str();
  return kExitOk;
}

// --- synth -----------------------------------------------------------------

struct SynthArgs {
  std::string preset = "soc6";
  std::uint64_t seed = 1;
  int tasks = 16;
  int width = 5;
  double bandwidth = 2.0;
  std::string out_dag;
  std::string out_platform;
};

int cmd_synth(const SynthArgs& a) {
  if (a.preset == "canonical") {
    if (!a.out_dag.empty()) io::write_json_file(a.out_dag, io::to_json(canonical_dag()));
    if (!a.out_platform.empty()) {
      io::write_json_file(a.out_platform, io::to_json(canonical_platform()));
    }
    return kExitOk;
  }
  std::vector<SynthPeModel> models;
  if (a.preset == "soc6") {
    models = soc_models();
  } else if (a.preset == "cpu3") {
    models.assign(3, SynthPeModel{});
  } else {
    throw ModelError("synth: unknown preset '" + a.preset + "' (canonical | soc6 | cpu3)");
  }
  SynthParams p;
  p.n_tasks = a.tasks;
  p.width = a.width;
  p.n_pes = static_cast<int>(models.size());
  p.pe_models = models;
  p.seed = a.seed;
  if (!a.out_dag.empty()) io::write_json_file(a.out_dag, io::to_json(synth_profile(p)));
  if (!a.out_platform.empty()) {
    io::write_json_file(a.out_platform, io::to_json(synth_platform(models, a.bandwidth, a.preset)));
  }
  return kExitOk;
}

// --- solve -----------------------------------------------------------------

struct SolveArgs {
  std::string instance;
  std::string platform;
  std::vector<std::string> dags;
  double time_limit = 10.0;
  std::size_t max_branching = 0;
  std::string out;
};

// Instance document: {platform: path | inline, dags: [path | inline], now?}
int cmd_solve(const SolveArgs& a) {
  std::optional<Platform> pf;
  std::vector<AppDag> dags;
  Time now = 0.0;
  if (!a.instance.empty()) {
    json doc = io::read_json_file(a.instance);
    fs::path dir = fs::path(a.instance).parent_path();
    auto resolve = [&](const json& v) { return dir / v.get<std::string>(); };
    if (!doc.contains("platform")) throw io::ParseError(a.instance + ": missing 'platform'");
    pf = doc["platform"].is_string() ? io::load_platform(resolve(doc["platform"]))
                                     : io::platform_from_json(doc["platform"]);
    for (const json& d : doc.value("dags", json::array())) {
      dags.push_back(d.is_string() ? io::load_dag(resolve(d)) : io::dag_from_json(d));
    }
    now = doc.value("now", 0.0);
  }
  if (!a.platform.empty()) pf = io::load_platform(a.platform);
  for (const std::string& d : a.dags) dags.push_back(io::load_dag(d));
  if (!pf) throw ModelError("solve: need --instance or --platform");
  if (dags.empty()) throw ModelError("solve: no DAGs given");

  CpInstance inst;
  inst.platform = &*pf;
  inst.now = now;
  for (std::size_t i = 0; i < dags.size(); ++i) {
    inst.dags.push_back({static_cast<int>(i), &dags[i], {}});
  }
  CpSolution sol = cp_solve(inst, {a.time_limit, a.max_branching});
  std::cout << "status " << to_string(sol.status) << '\n';
  if (sol.status == CpStatus::infeasible) return kExitInfeasible;
  std::cout << "objective " << format_number(sol.objective) << '\n';
  if (!a.out.empty()) {
    fs::create_directories(a.out);
    json doc = table_json(sol.table, inst.dags, *pf);
    doc["status"] = to_string(sol.status);
    doc["objective"] = sol.objective;
    doc["nodes"] = sol.nodes;
    json trace = json::array();
    for (const CpTracePoint& t : sol.trace) trace.push_back(t.objective);
    doc["incumbents"] = std::move(trace);
    io::write_json_file(fs::path(a.out) / "solution.json", doc);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heterogeneous SoC list schedulers and discrete-event simulator", "hetsched"};
  app.require_subcommand(1);

  ValidateArgs va;
  auto* validate = app.add_subcommand("validate", "Check platform, DAG and workload files");
  validate->add_option("--platform", va.platform, "Platform JSON")->required();
  validate->add_option("--dag", va.dags, "Application DAG JSON");
  validate->add_option("--workload", va.workload, "Workload JSON");

  ScheduleArgs sa;
  auto* schedule = app.add_subcommand("schedule", "Statically schedule one DAG");
  schedule->add_option("--platform", sa.platform, "Platform JSON")->required();
  schedule->add_option("--dag", sa.dag, "Application DAG JSON")->required();
  schedule->add_option("--scheduler", sa.scheduler, "heft_base | peft_base | cp");
  schedule->add_option("--out", sa.out, "Output directory");
  schedule->add_option("--time-limit", sa.time_limit, "Solver time limit (s)");
  schedule->add_option("--max-branching", sa.max_branching, "Solver branching width (0 = all)");

  SimulateArgs ma;
  auto* simulate = app.add_subcommand("simulate", "Run one simulation");
  simulate->add_option("--platform", ma.platform, "Platform JSON")->required();
  simulate->add_option("--workload", ma.workload, "Workload JSON")->required();
  simulate->add_option("--scheduler", ma.scheduler, "Scheduler name")->required();
  simulate->add_option("--seed", ma.seed, "Overrides the workload seed");
  simulate->add_option("--duration", ma.duration, "Overrides the workload duration");
  simulate->add_option("--rate", ma.rate, "Overrides the target frame rate");
  simulate->add_option("--noise", ma.noise, "Runtime perturbation epsilon");
  simulate->add_option("--time-limit", ma.time_limit, "cp time limit per call (s)");
  simulate->add_option("--max-branching", ma.max_branching, "cp branching width");
  simulate->add_option("--time-unit", ma.time_unit, "Label for simulated time");
  simulate->add_option("--out", ma.out, "Output directory");
  simulate->add_flag("--profile", ma.profile, "Write scheduler wall-clock profile");

  SweepArgs wa;
  auto* sweep = app.add_subcommand("sweep", "Sweep target frame rates");
  sweep->add_option("--platform", wa.platform, "Platform JSON")->required();
  sweep->add_option("--workload", wa.workload, "Workload JSON")->required();
  sweep->add_option("--scheduler,--schedulers", wa.schedulers, "Scheduler names")
      ->required()
      ->delimiter(',');
  sweep->add_option("--rates", wa.rates, "Target rates")->required()->delimiter(',');
  sweep->add_option("--reps", wa.reps, "Repetitions per cell (default 10, cp 3)");
  sweep->add_option("--duration", wa.duration, "Overrides the workload duration");
  sweep->add_option("--seed", wa.seed, "Base seed; rep k uses seed + k");
  sweep->add_option("--jobs", wa.jobs, "Parallel simulations");
  sweep->add_option("--time-limit", wa.time_limit, "cp time limit per call (s)");
  sweep->add_option("--max-branching", wa.max_branching, "cp branching width");
  sweep->add_option("--tol", wa.tol, "Saturation tolerance");
  sweep->add_option("--out", wa.out, "Output directory");

  SynthArgs ya;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic DAG and platform");
  synth->add_option("--preset", ya.preset, "canonical | soc6 | cpu3");
  synth->add_option("--seed", ya.seed, "Generator seed");
  synth->add_option("--tasks", ya.tasks, "Task count");
  synth->add_option("--width", ya.width, "Maximum layer width");
  synth->add_option("--bandwidth", ya.bandwidth, "Uniform link bandwidth");
  synth->add_option("--out-dag", ya.out_dag, "DAG output file");
  synth->add_option("--out-platform", ya.out_platform, "Platform output file");

  SolveArgs la;
  auto* solve = app.add_subcommand("solve", "Run the exact solver");
  solve->add_option("--instance", la.instance, "Instance JSON");
  solve->add_option("--platform", la.platform, "Platform JSON");
  solve->add_option("--dag", la.dags, "Application DAG JSON");
  solve->add_option("--time-limit", la.time_limit, "Time limit (s)");
  solve->add_option("--max-branching", la.max_branching, "Branching width (0 = all)");
  solve->add_option("--out", la.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*validate) return cmd_validate(va);
    if (*schedule) return cmd_schedule(sa);
    if (*simulate) return cmd_simulate(ma);
    if (*sweep) return cmd_sweep(wa);
    if (*solve) return cmd_solve(la);
    if (*synth) return cmd_synth(ya);
  } catch (const InfeasibleError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const DeadlockError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDeadlock;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}
