// difuzz: directed greybox fuzzing pipeline for MiniProc programs.
//
//   difuzz graphs      --src <dir> -o <dir>         emit call graph + CFG DOT files
//   difuzz preprocess  --graphs <dir> --targets <f> -o ets.toml
//   difuzz instrument  --src <dir> --ets <f> -o <dir>
//   difuzz fuzz        --program <dir> --ets <f> --mode directed|coverage ...
//   difuzz bench       --config bench.toml --trials N --jobs N -o report/
//   difuzz gen-suite   -o <dir>                     emit the synthetic benchmark suite

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "difuzz/bench/bench.hpp"
#include "difuzz/bench/report.hpp"
#include "difuzz/bench/suite.hpp"
#include "difuzz/engine/fuzz.hpp"
#include "difuzz/instrument/instrument.hpp"
#include "difuzz/lang/parse.hpp"
#include "difuzz/preprocess/analysis.hpp"
#include "difuzz/preprocess/ets_io.hpp"
#include "difuzz/preprocess/graph_io.hpp"

namespace {

std::vector<difuzz::lang::Ast> parse_source_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  std::vector<fs::path> sources;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".mp") sources.push_back(entry.path());
  std::sort(sources.begin(), sources.end());
  if (sources.empty()) throw std::runtime_error("no .mp files in " + dir);
  std::vector<difuzz::lang::Ast> files;
  for (const auto& p : sources) {
    std::ifstream in(p, std::ios::binary);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    files.push_back(difuzz::lang::parse(text, p.filename().string()));
  }
  return files;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"directed greybox fuzzing pipeline for MiniProc programs"};
  app.require_subcommand(1);

  // graphs
  std::string g_src, g_out;
  CLI::App* graphs = app.add_subcommand("graphs", "build call graph and CFGs as DOT files");
  graphs->add_option("--src", g_src, "source directory (.mp files)")->required();
  graphs->add_option("-o,--out", g_out, "output graphs directory")->required();

  // preprocess
  std::string p_graphs, p_targets, p_out;
  CLI::App* preprocess =
      app.add_subcommand("preprocess", "compute the enhanced target sequence");
  preprocess->add_option("--graphs", p_graphs, "graphs directory")->required();
  preprocess->add_option("--targets", p_targets, "target list (id\\tpath:line\\ttimeout_s)")
      ->required();
  preprocess->add_option("-o,--out", p_out, "output ets.toml path")->required();

  // instrument
  std::string i_src, i_ets, i_out;
  CLI::App* instrument = app.add_subcommand("instrument", "insert ETS and coverage probes");
  instrument->add_option("--src", i_src, "source directory")->required();
  instrument->add_option("--ets", i_ets, "ets.toml path")->required();
  instrument->add_option("-o,--out", i_out, "output directory")->required();

  // fuzz
  std::string f_program, f_ets, f_mode = "directed", f_clock = "wall", f_out;
  double f_timeout = 60.0, f_t_exploit = 60.0, f_rate = 1000.0;
  std::uint64_t f_seed = 1;
  CLI::App* fuzz = app.add_subcommand("fuzz", "run one fuzzing campaign");
  fuzz->add_option("--program", f_program, "instrumented program directory")->required();
  fuzz->add_option("--ets", f_ets, "ets.toml path")->required();
  fuzz->add_option("--mode", f_mode, "directed or coverage")
      ->check(CLI::IsMember({"directed", "coverage"}));
  fuzz->add_option("--timeout", f_timeout, "campaign timeout in seconds");
  fuzz->add_option("--rng-seed", f_seed, "random seed");
  fuzz->add_option("--t-exploit", f_t_exploit, "seconds until the exploitation regime");
  fuzz->add_option("--clock", f_clock, "wall or executions")
      ->check(CLI::IsMember({"wall", "executions"}));
  fuzz->add_option("--execs-per-virtual-s", f_rate,
                   "executions per virtual second (executions clock)");
  fuzz->add_option("-o,--out", f_out, "output directory")->required();

  // bench
  std::string b_config, b_out;
  int b_trials = 0, b_jobs = 0;
  CLI::App* bench = app.add_subcommand("bench", "run the TTE benchmark matrix");
  bench->add_option("--config", b_config, "bench.toml path")->required();
  bench->add_option("--trials", b_trials, "trials per cell (overrides config)");
  bench->add_option("--jobs", b_jobs, "concurrent campaigns (overrides config)");
  bench->add_option("-o,--out", b_out, "report output directory")->required();

  // gen-suite
  std::string s_out;
  CLI::App* gen = app.add_subcommand("gen-suite", "emit the synthetic benchmark suite");
  gen->add_option("-o,--out", s_out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (graphs->parsed()) {
      auto files = parse_source_dir(g_src);
      difuzz::pre::ProgramModel model = difuzz::pre::build_model(files);
      difuzz::pre::write_graphs_dir(model, g_out);
      std::cout << "wrote " << model.cfgs.size() << " CFGs and the call graph to " << g_out
                << "\n";
    } else if (preprocess->parsed()) {
      difuzz::pre::ProgramModel model = difuzz::pre::load_graphs_dir(p_graphs);
      auto targets = difuzz::pre::load_target_list(p_targets);
      difuzz::pre::EnhancedTargetSequence ets = difuzz::pre::compute_ets(model, targets);
      difuzz::pre::write_ets_toml(ets, p_out);
      std::cout << "wrote " << ets.blocks.size() << " ETS blocks to " << p_out << "\n";
    } else if (instrument->parsed()) {
      difuzz::pre::EnhancedTargetSequence ets = difuzz::pre::read_ets_toml(i_ets);
      difuzz::inst::InstrumentationPlan plan =
          difuzz::inst::instrument_program(i_src, ets, i_out);
      std::cout << "inserted " << plan.ets_insertions.size() << " ETS probes and "
                << plan.coverage_insertions.size() << " coverage guards into " << i_out
                << "\n";
      if (!plan.unplaceable.empty())
        std::cout << "warning: " << plan.unplaceable.size() << " ETS blocks unplaceable\n";
    } else if (fuzz->parsed()) {
      difuzz::engine::FuzzConfig fc;
      fc.mode = difuzz::engine::parse_mode(f_mode);
      fc.timeout_s = f_timeout;
      fc.rng_seed = f_seed;
      fc.sched.t_exploit_s = f_t_exploit;
      fc.clock = f_clock == "wall" ? difuzz::engine::ClockKind::Wall
                                   : difuzz::engine::ClockKind::Executions;
      fc.execs_per_virtual_s = f_rate;
      fc.out_dir = f_out;
      difuzz::lang::Ast program = difuzz::engine::load_program(f_program);
      difuzz::pre::EnhancedTargetSequence ets = difuzz::pre::read_ets_toml(f_ets);
      difuzz::engine::CampaignResult r = difuzz::engine::fuzz_loop(program, ets, fc);
      if (r.found)
        std::cout << "crash at " << r.crash_pos.file << ":" << r.crash_pos.line << " after "
                  << r.tte_s << " s (" << r.executions << " execs)\n";
      else
        std::cout << "timeout after " << r.executions << " execs, corpus " << r.corpus_size
                  << "\n";
    } else if (bench->parsed()) {
      difuzz::bench::BenchConfig cfg = difuzz::bench::load_bench_config(b_config);
      if (b_trials > 0) cfg.trials = b_trials;
      if (b_jobs > 0) cfg.jobs = b_jobs;
      difuzz::bench::BenchReport report = difuzz::bench::run_bench(cfg, b_out);
      difuzz::bench::write_report(report, b_out);
      std::cout << difuzz::bench::render_text(report);
    } else if (gen->parsed()) {
      auto suite = difuzz::bench::gen_benchmark_suite(s_out);
      std::cout << "wrote " << suite.size() << " programs to " << s_out << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
