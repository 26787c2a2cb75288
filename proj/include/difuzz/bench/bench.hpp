#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "difuzz/engine/fuzz.hpp"
#include "difuzz/instrument/instrument.hpp"
#include "difuzz/preprocess/analysis.hpp"
#include "difuzz/preprocess/ets.hpp"
#include "difuzz/util/toml.hpp"

namespace difuzz::bench {

struct PipelineError : std::runtime_error {
  PipelineError(const std::string& program, const std::string& stage, const std::string& why)
      : std::runtime_error(program + " [" + stage + "]: " + why),
        program(program),
        stage(stage) {}
  std::string program;
  std::string stage;
};

struct BenchProgram {
  std::string name;
  std::string source_dir;
  std::string targets_path;
};

struct BenchConfig {
  std::vector<BenchProgram> programs;
  std::vector<engine::FuzzMode> modes;
  int trials = 10;
  int jobs = 1;
  std::uint64_t rng_seed_base = 1000;
  engine::ClockKind clock = engine::ClockKind::Wall;
  double execs_per_virtual_s = 1000.0;
  double timeout_override_s = 0.0;  // 0: use each target's own timeout
  double t_exploit_s = 60.0;
  bool write_artifacts = true;
};

struct TteCell {
  std::optional<double> best_s;
  std::optional<double> avg_s;  // mean over non-timeout trials
  double timeout_pct = 100.0;
  int trials = 0;
  std::vector<double> ttes;  // the non-timeout observations
};

struct BenchRow {
  std::string program;
  std::string target_id;
  std::vector<TteCell> cells;  // parallel to config.modes
};

struct BenchReport {
  std::vector<engine::FuzzMode> modes;
  std::vector<BenchRow> rows;
};

inline TteCell make_cell(const std::vector<std::optional<double>>& trial_ttes) {
  TteCell cell;
  cell.trials = static_cast<int>(trial_ttes.size());
  int timeouts = 0;
  for (const auto& t : trial_ttes) {
    if (!t) {
      ++timeouts;
      continue;
    }
    cell.ttes.push_back(*t);
    if (!cell.best_s || *t < *cell.best_s) cell.best_s = *t;
  }
  if (!cell.ttes.empty()) {
    double sum = 0.0;
    for (double t : cell.ttes) sum += t;
    cell.avg_s = sum / static_cast<double>(cell.ttes.size());
  }
  cell.timeout_pct =
      cell.trials == 0 ? 100.0 : 100.0 * static_cast<double>(timeouts) / cell.trials;
  return cell;
}

// Full static pipeline for one program: parse, analyze, instrument, merge.
struct PreparedProgram {
  lang::Ast instrumented;  // merged, ETS + coverage probes in place
  pre::EnhancedTargetSequence ets;
  std::vector<pre::TargetPoint> targets;
};

inline PreparedProgram prepare_program(const BenchProgram& bp) {
  namespace fs = std::filesystem;
  std::vector<fs::path> sources;
  try {
    for (const auto& entry : fs::directory_iterator(bp.source_dir))
      if (entry.path().extension() == ".mp") sources.push_back(entry.path());
  } catch (const fs::filesystem_error& e) {
    throw PipelineError(bp.name, "preprocess", e.what());
  }
  std::sort(sources.begin(), sources.end());
  if (sources.empty()) throw PipelineError(bp.name, "preprocess", "no .mp files");

  PreparedProgram out;
  std::vector<lang::Ast> files;
  try {
    for (const auto& p : sources) {
      std::ifstream in(p, std::ios::binary);
      std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      files.push_back(lang::parse(text, p.filename().string()));
    }
    out.targets = pre::load_target_list(bp.targets_path);
    pre::ProgramModel model = pre::build_model(files);
    out.ets = pre::compute_ets(model, out.targets);
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError(bp.name, "preprocess", e.what());
  }

  try {
    std::vector<lang::Ast> instrumented;
    int next_guard = 1;
    for (const auto& ast : files) {
      auto [with_ets, ets_plan] = inst::instrument_ets(ast, out.ets);
      auto [with_cov, cov_plan] = inst::instrument_coverage(with_ets, next_guard);
      next_guard += static_cast<int>(cov_plan.coverage_insertions.size());
      instrumented.push_back(std::move(with_cov));
    }
    out.instrumented = engine::merge_program(instrumented);
  } catch (const std::exception& e) {
    throw PipelineError(bp.name, "instrument", e.what());
  }
  return out;
}

inline BenchReport run_bench(const BenchConfig& config, const std::string& out_dir) {
  if (config.trials < 1) throw std::runtime_error("trials must be >= 1");
  if (config.modes.empty()) throw std::runtime_error("no modes configured");

  struct Task {
    std::size_t program;
    std::size_t mode;
    int trial;
  };
  std::vector<PreparedProgram> prepared;
  prepared.reserve(config.programs.size());
  for (const auto& bp : config.programs) prepared.push_back(prepare_program(bp));

  std::vector<Task> tasks;
  for (std::size_t p = 0; p < config.programs.size(); ++p)
    for (std::size_t m = 0; m < config.modes.size(); ++m)
      for (int t = 0; t < config.trials; ++t) tasks.push_back({p, m, t});

  // results[p][m][t]
  std::vector<std::vector<std::vector<std::optional<double>>>> results(
      config.programs.size(),
      std::vector<std::vector<std::optional<double>>>(
          config.modes.size(), std::vector<std::optional<double>>(
                                   static_cast<std::size_t>(config.trials))));

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::vector<std::string> errors;

  auto worker = [&] {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& task = tasks[i];
      const BenchProgram& bp = config.programs[task.program];
      const PreparedProgram& prog = prepared[task.program];
      try {
        engine::FuzzConfig fc;
        fc.mode = config.modes[task.mode];
        fc.timeout_s = config.timeout_override_s > 0.0 ? config.timeout_override_s
                                                       : prog.targets.front().timeout_s;
        fc.rng_seed = config.rng_seed_base + static_cast<std::uint64_t>(task.trial);
        fc.clock = config.clock;
        fc.execs_per_virtual_s = config.execs_per_virtual_s;
        fc.sched.t_exploit_s = config.t_exploit_s;
        if (config.write_artifacts && !out_dir.empty()) {
          std::ostringstream dir;
          dir << out_dir << "/trials/" << bp.name << "/" << engine::to_string(fc.mode)
              << "/trial_" << task.trial;
          fc.out_dir = dir.str();
        }
        engine::CampaignResult r = engine::fuzz_loop(prog.instrumented, prog.ets, fc);
        // Gate: only validated crashes count toward TTE statistics.
        if (r.found &&
            engine::validate_crash(prog.instrumented, r.crash_input, prog.ets, fc.step_limit))
          results[task.program][task.mode][static_cast<std::size_t>(task.trial)] = r.tte_s;
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        errors.push_back(bp.name + " [fuzz]: " + e.what());
      }
    }
  };

  int jobs = std::max(1, config.jobs);
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (!errors.empty())
    throw PipelineError(errors.front().substr(0, errors.front().find(' ')), "fuzz",
                        errors.front());

  BenchReport report;
  report.modes = config.modes;
  for (std::size_t p = 0; p < config.programs.size(); ++p) {
    BenchRow row;
    row.program = config.programs[p].name;
    row.target_id = prepared[p].targets.front().id;
    for (std::size_t m = 0; m < config.modes.size(); ++m)
      row.cells.push_back(make_cell(results[p][m]));
    report.rows.push_back(std::move(row));
  }
  return report;
}

// bench.toml: trials, jobs, rng_seed_base, clock ("wall"|"executions"),
// modes = ["directed", "coverage"], optional timeout_s / t_exploit_s /
// execs_per_virtual_s, and [[program]] sections (name, source_dir, targets).
// Relative paths resolve against the config file's directory.
inline BenchConfig load_bench_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open bench config: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  toml::Document doc = toml::parse(ss.str());

  static const char* known_root[] = {"trials",    "jobs",      "rng_seed_base",
                                     "clock",     "modes",     "timeout_s",
                                     "t_exploit_s", "execs_per_virtual_s"};
  for (const auto& [key, value] : doc.root.entries) {
    (void)value;
    bool ok = false;
    for (const char* k : known_root)
      if (key == k) ok = true;
    if (!ok) throw toml::Error(doc.root.lines.at(key), "unknown key '" + key + "'");
  }
  for (const auto& [name, tables] : doc.arrays) {
    if (name != "program") throw toml::Error(0, "unknown section '" + name + "'");
    for (const auto& t : tables)
      for (const auto& [key, value] : t.entries) {
        (void)value;
        if (key != "name" && key != "source_dir" && key != "targets")
          throw toml::Error(t.lines.at(key), "unknown program key '" + key + "'");
      }
  }

  BenchConfig cfg;
  if (doc.root.has("trials")) cfg.trials = static_cast<int>(doc.root.get_int("trials"));
  if (doc.root.has("jobs")) cfg.jobs = static_cast<int>(doc.root.get_int("jobs"));
  if (doc.root.has("rng_seed_base"))
    cfg.rng_seed_base = static_cast<std::uint64_t>(doc.root.get_int("rng_seed_base"));
  if (doc.root.has("clock")) {
    const std::string& c = doc.root.get_string("clock");
    if (c == "wall")
      cfg.clock = engine::ClockKind::Wall;
    else if (c == "executions")
      cfg.clock = engine::ClockKind::Executions;
    else
      throw toml::Error(doc.root.lines.at("clock"), "clock must be wall or executions");
  }
  if (doc.root.has("timeout_s")) cfg.timeout_override_s = doc.root.get_float("timeout_s");
  if (doc.root.has("t_exploit_s")) cfg.t_exploit_s = doc.root.get_float("t_exploit_s");
  if (doc.root.has("execs_per_virtual_s"))
    cfg.execs_per_virtual_s = doc.root.get_float("execs_per_virtual_s");
  if (cfg.trials < 1) throw std::runtime_error("trials must be >= 1");
  if (doc.root.has("timeout_s") && cfg.timeout_override_s <= 0)
    throw std::runtime_error("timeout_s must be positive");

  std::vector<std::string> mode_names = {"directed", "coverage"};
  if (doc.root.has("modes")) mode_names = doc.root.get_string_array("modes");
  for (const auto& m : mode_names) cfg.modes.push_back(engine::parse_mode(m));

  std::filesystem::path base = std::filesystem::path(path).parent_path();
  auto resolve = [&base](const std::string& p) {
    std::filesystem::path fp(p);
    return fp.is_absolute() ? fp.string() : (base / fp).string();
  };
  auto it = doc.arrays.find("program");
  if (it == doc.arrays.end() || it->second.empty())
    throw std::runtime_error("bench config lists no [[program]] sections");
  for (const auto& t : it->second) {
    BenchProgram bp;
    bp.name = t.get_string("name");
    bp.source_dir = resolve(t.get_string("source_dir"));
    bp.targets_path = resolve(t.get_string("targets"));
    cfg.programs.push_back(std::move(bp));
  }
  return cfg;
}

}  // namespace difuzz::bench
