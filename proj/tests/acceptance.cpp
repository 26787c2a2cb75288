// Acceptance gate: one pass/fail line per criterion, non-zero exit on any
// failure. Each check is self-contained and prints its elapsed time.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "difuzz/bench/bench.hpp"
#include "difuzz/bench/report.hpp"
#include "difuzz/bench/suite.hpp"
#include "difuzz/engine/fuzz.hpp"
#include "difuzz/engine/schedule.hpp"
#include "difuzz/graph/dot.hpp"
#include "difuzz/instrument/instrument.hpp"
#include "difuzz/lang/emit.hpp"
#include "difuzz/lang/interp.hpp"
#include "difuzz/lang/parse.hpp"
#include "difuzz/preprocess/analysis.hpp"
#include "support/distance_oracle.hpp"
#include "support/graph_gen.hpp"
#include "support/program_gen.hpp"

using namespace difuzz;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

pre::ProgramModel model_of(const lang::Ast& ast) {
  std::vector<lang::Ast> files;
  files.push_back(lang::clone_ast(ast));
  return pre::build_model(files);
}

pre::TargetPoint target_at(const std::string& file, int line) {
  pre::TargetPoint tp;
  tp.id = "t1";
  tp.file = file;
  tp.line = line;
  return tp;
}

struct Check {
  std::string what;
  bool ok = true;
  std::vector<std::string> notes;

  void require(bool cond, const std::string& why) {
    if (!cond) {
      ok = false;
      notes.push_back(why);
    }
  }
};

bool report(int n, Check& c, double elapsed) {
  std::printf("criterion %d: %s ... %s (%.1f s)\n", n, c.what.c_str(),
              c.ok ? "PASS" : "FAIL", elapsed);
  for (const auto& note : c.notes) std::printf("    %s\n", note.c_str());
  std::fflush(stdout);
  return c.ok;
}

// ---------------------------------------------------------------------------

bool criterion1_dot_round_trip() {
  auto start = Clock::now();
  Check c{"DOT round trip on 500 generated graphs + 3 fixtures"};
  testgen::Rng rng(101);
  for (int i = 0; i < 500 && c.ok; ++i) {
    graphs::ProgramGraph g = testgen::random_graph(rng, i % 2 == 0);
    graphs::ProgramGraph back = graphs::parse_dot(graphs::emit_dot(g));
    c.require(graphs::graph_eq(g, back), "generated graph " + std::to_string(i));
  }
  for (const char* name : {"fig_cpp.dot", "fig_rust.dot", "fig_go.dot"}) {
    graphs::ProgramGraph g = graphs::parse_dot(slurp(fs::path(FIXTURE_DIR) / name));
    graphs::ProgramGraph back = graphs::parse_dot(graphs::emit_dot(g));
    c.require(graphs::graph_eq(g, back), std::string("fixture ") + name);
    bool indirect = false;
    for (const auto& e : back.edges) indirect |= e.indirect;
    if (std::string(name) == "fig_cpp.dot")
      c.require(indirect, "indirect flag lost on fig_cpp.dot");
  }
  double elapsed = seconds_since(start);
  c.require(elapsed < 10.0, "runtime bound exceeded");
  return report(1, c, elapsed);
}

bool criterion2_distance_oracle() {
  auto start = Clock::now();
  Check c{"block distances match the all-pairs oracle on 200 programs"};
  testgen::Rng rng(202);
  testgen::GenOptions opts;
  opts.max_extra_functions = 2;
  opts.max_stmts = 3;
  int done = 0;
  while (done < 200 && c.ok) {
    testgen::ProgramGen gen(rng, opts);
    pre::ProgramModel m = model_of(lang::parse(gen.generate(), "gen.mp"));
    std::size_t blocks = 0;
    for (const auto& cfg : m.cfgs) blocks += cfg.blocks.size();
    if (blocks > 20) continue;
    ++done;
    const auto& tcfg = m.cfgs[testgen::below(rng, m.cfgs.size())];
    const auto& tblk = tcfg.blocks[testgen::below(rng, tcfg.blocks.size())];
    pre::TargetPoint tp = target_at(tcfg.file, tblk.start_line);
    for (const auto& cfg : m.cfgs) {
      std::vector<Rational> expected = oracle::block_distances(m, tp, cfg);
      for (const auto& b : cfg.blocks) {
        Rational got = pre::block_distance(m, tp, {cfg.function, cfg.occurrence, b.index});
        c.require(got == expected[static_cast<std::size_t>(b.index)],
                  "program " + std::to_string(done) + " " + cfg.function + "#bb" +
                      std::to_string(b.index));
      }
    }
  }
  double elapsed = seconds_since(start);
  c.require(elapsed < 60.0, "runtime bound exceeded");
  return report(2, c, elapsed);
}

bool criterion3_semantics_preservation() {
  auto start = Clock::now();
  Check c{"instrumentation preserves semantics on 100 programs x 100 inputs"};
  testgen::Rng rng(303);
  for (int p = 0; p < 100 && c.ok; ++p) {
    testgen::ProgramGen gen(rng);
    lang::Ast ast = lang::parse(gen.generate(), "gen.mp");
    pre::ProgramModel m = model_of(ast);
    const auto& tcfg = m.cfgs[testgen::below(rng, m.cfgs.size())];
    const auto& tblk = tcfg.blocks[testgen::below(rng, tcfg.blocks.size())];
    pre::EnhancedTargetSequence ets =
        pre::compute_ets(m, {target_at(tcfg.file, tblk.start_line)});
    auto [with_ets, p1] = inst::instrument_ets(ast, ets);
    auto [full, p2] = inst::instrument_coverage(with_ets);
    lang::Interpreter plain(ast);
    lang::Interpreter probed(full);
    for (int r = 0; r < 100 && c.ok; ++r) {
      auto input = testgen::random_input(rng);
      lang::ExecOutcome a = plain.run(input);
      lang::ExecOutcome b = probed.run(input);
      c.require(a.status == b.status && a.stdout_text == b.stdout_text,
                "divergence on program " + std::to_string(p) + " input " +
                    std::to_string(r));
    }
  }
  double elapsed = seconds_since(start);
  c.require(elapsed < 120.0, "runtime bound exceeded");
  return report(3, c, elapsed);
}

bool criterion4_duplicate_position() {
  auto start = Clock::now();
  Check c{"3 duplicate-position hosts give 3 weight-1 blocks and 3 probes"};
  lang::Ast ast = lang::parse(
      "func[3] h() {\n"
      "    panic(\"dup\");\n"
      "}\n"
      "func main() {\n"
      "    print(\"ok\");\n"
      "}\n",
      "t.mp");
  pre::EnhancedTargetSequence ets = pre::compute_ets(model_of(ast), {target_at("t.mp", 2)});
  int full_weight = 0;
  std::set<int> occurrences;
  for (const auto& b : ets.blocks)
    if (b.weight == 1.0) {
      ++full_weight;
      occurrences.insert(b.occurrence);
    }
  c.require(static_cast<int>(ets.blocks.size()) == 3, "expected exactly 3 ETS blocks");
  c.require(full_weight == 3, "expected exactly 3 weight-1 blocks");
  c.require(occurrences == std::set<int>{0, 1, 2}, "one block per instance");

  auto [instrumented, plan] = inst::instrument_ets(ast, ets);
  c.require(plan.ets_insertions.size() == 3, "expected 3 probe insertions");
  std::set<int> planned, listed;
  for (const auto& e : plan.ets_insertions) planned.insert(e.block_id);
  for (const auto& b : ets.blocks) listed.insert(b.block_id);
  c.require(planned == listed, "insertions must match the listed blocks");
  std::string text = lang::emit(instrumented);
  std::size_t probes = 0, pos = 0;
  while ((pos = text.find("InstrumentETS(", pos)) != std::string::npos) {
    ++probes;
    pos += 1;
  }
  // The emitter collapses the three shared-span instances back to one
  // `func[3]` declaration, so the shared body shows one probe in the text
  // while the plan carries all three.
  c.require(probes == 1, "collapsed source should show one probe in the shared body");
  return report(4, c, seconds_since(start));
}

bool criterion5_annealing_invariants() {
  auto start = Clock::now();
  Check c{"annealing invariants over 1000 random corpus states"};
  testgen::Rng rng(505);
  engine::SchedulerConfig cfg;
  auto uniform = [&](double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng()) /
                             static_cast<double>(std::numeric_limits<std::uint64_t>::max()));
  };
  for (int i = 0; i < 1000 && c.ok; ++i) {
    std::size_t n = 2 + testgen::below(rng, 30);
    std::vector<double> dist(n);
    for (auto& d : dist)
      d = testgen::below(rng, 10) == 0 ? engine::kInfiniteDistance : uniform(0.0, 500.0);
    double min_d = 1e18, max_d = 0.0;
    for (double d : dist)
      if (!std::isinf(d)) {
        min_d = std::min(min_d, d);
        max_d = std::max(max_d, d);
      }
    if (min_d > max_d) {
      min_d = 0.0;
      max_d = 0.0;
    }

    // At t = 0 every entry is energy 0.5.
    engine::SchedulerState st0 = engine::scheduler_state(0.0, min_d, max_d, cfg);
    for (double d : dist)
      c.require(engine::annealing_energy(d, st0) == 0.5, "energy at t=0 must be 0.5");

    // Deep in exploitation the best seed carries the highest energy.
    double cold_elapsed = 21.0 * cfg.t_exploit_s;  // 20^-21 < 2^-20
    engine::SchedulerState cold = engine::scheduler_state(cold_elapsed, min_d, max_d, cfg);
    c.require(cold.temperature < std::pow(2.0, -20), "temperature not cold enough");
    std::size_t argmax = 0;
    for (std::size_t k = 1; k < n; ++k)
      if (engine::annealing_energy(dist[k], cold) >
          engine::annealing_energy(dist[argmax], cold))
        argmax = k;
    double best = 1e18;
    for (double d : dist) best = std::min(best, d);
    c.require(dist[argmax] == best, "argmax energy must be argmin distance");

    // Strict monotone cooling.
    double t1 = uniform(0.0, 300.0);
    double t2 = t1 + uniform(0.001, 300.0);
    c.require(engine::temperature(t2, cfg) < engine::temperature(t1, cfg),
              "temperature must strictly decrease");
  }
  return report(5, c, seconds_since(start));
}

struct AblationCell {
  std::optional<double> best;
  double censored_median = 0.0;
};

AblationCell summarize(const bench::TteCell& cell, double timeout_s) {
  AblationCell out;
  out.best = cell.best_s;
  std::vector<double> all = cell.ttes;
  while (static_cast<int>(all.size()) < cell.trials) all.push_back(timeout_s);
  std::sort(all.begin(), all.end());
  std::size_t n = all.size();
  out.censored_median =
      n % 2 ? all[n / 2] : 0.5 * (all[n / 2 - 1] + all[n / 2]);
  return out;
}

bool criterion6_ablation(const fs::path& suite_dir) {
  auto start = Clock::now();
  Check c{"directed beats coverage on the magic-byte and deep-call programs"};
  const double timeout_s = 300.0;
  bench::BenchConfig cfg;
  cfg.programs = {
      {"b_magic_8", (suite_dir / "b_magic_8").string(),
       (suite_dir / "b_magic_8" / "targets.tsv").string()},
      {"d_deep", (suite_dir / "d_deep").string(),
       (suite_dir / "d_deep" / "targets.tsv").string()},
  };
  cfg.modes = {engine::FuzzMode::Directed, engine::FuzzMode::CoverageOnly};
  cfg.trials = 10;
  cfg.jobs = 1;
  cfg.clock = engine::ClockKind::Executions;  // deterministic virtual seconds
  cfg.timeout_override_s = timeout_s;
  cfg.write_artifacts = false;
  bench::BenchReport report_data = bench::run_bench(cfg, "");

  bool median_win = false;
  for (const auto& row : report_data.rows) {
    AblationCell directed = summarize(row.cells[0], timeout_s);
    AblationCell coverage = summarize(row.cells[1], timeout_s);
    double d_best = directed.best ? *directed.best : timeout_s;
    double c_best = coverage.best ? *coverage.best : timeout_s;
    c.require(d_best <= c_best, row.program + ": directed best " + std::to_string(d_best) +
                                    " > coverage best " + std::to_string(c_best));
    if (directed.censored_median <= 0.5 * coverage.censored_median) median_win = true;
    c.notes.push_back(row.program + ": directed best/median " + std::to_string(d_best) +
                      "/" + std::to_string(directed.censored_median) +
                      ", coverage best/median " + std::to_string(c_best) + "/" +
                      std::to_string(coverage.censored_median));
  }
  c.require(median_win, "no program with directed median <= 0.5x coverage median");
  return report(6, c, seconds_since(start));
}

bool criterion7_negative_control(const fs::path& suite_dir) {
  auto start = Clock::now();
  Check c{"dead-code target times out 100% and renders the TO cell"};
  bench::BenchConfig cfg;
  cfg.programs = {{"e_dead", (suite_dir / "e_dead").string(),
                   (suite_dir / "e_dead" / "targets.tsv").string()}};
  cfg.modes = {engine::FuzzMode::Directed, engine::FuzzMode::CoverageOnly};
  cfg.trials = 10;
  cfg.jobs = 1;
  cfg.clock = engine::ClockKind::Executions;
  cfg.timeout_override_s = 300.0;
  cfg.write_artifacts = false;
  bench::BenchReport report_data = bench::run_bench(cfg, "");
  for (const auto& cell : report_data.rows[0].cells) {
    c.require(cell.timeout_pct == 100.0, "expected 100% timeouts");
    c.require(!cell.best_s && !cell.avg_s, "no TTE should exist");
  }
  std::string text = bench::render_text(report_data);
  c.require(text.find("TO (100% TO)") != std::string::npos,
            "report must render 'TO (100% TO)'");
  return report(7, c, seconds_since(start));
}

bool criterion8_crash_validation() {
  auto start = Clock::now();
  Check c{"crash gate: non-target panics are never counted"};

  // An unreachable target next to a decoy panic that fires on every run: the
  // campaign observes crashes constantly but must never report a find.
  std::string decoy_src =
      "func main() {\n"
      "    n = input(0);\n"
      "    if n < 0 {\n"
      "        panic(\"target\");\n"
      "    }\n"
      "    panic(\"decoy\");\n"
      "}\n";
  {
    lang::Ast ast = lang::parse(decoy_src, "t.mp");
    pre::EnhancedTargetSequence ets =
        pre::compute_ets(model_of(ast), {target_at("t.mp", 4)});
    auto [with_ets, p1] = inst::instrument_ets(ast, ets);
    auto [full, p2] = inst::instrument_coverage(with_ets);
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
      engine::FuzzConfig fc;
      fc.clock = engine::ClockKind::Executions;
      fc.timeout_s = 30.0;  // 30k executions, each one panicking at the decoy
      fc.rng_seed = seed;
      engine::CampaignResult r = engine::fuzz_loop(full, ets, fc);
      c.require(!r.found, "decoy panic was counted (seed " + std::to_string(seed) + ")");
    }
  }

  // Positive side: a reported TTE's stored input re-executes to a panic
  // inside the target block's line range.
  {
    bench::SuiteProgram sp = bench::benchmark_suite()[1];  // b_magic_2
    lang::Ast ast = lang::parse(sp.source, sp.file);
    pre::EnhancedTargetSequence ets =
        pre::compute_ets(model_of(ast), {target_at(sp.file, sp.target_line)});
    auto [with_ets, p1] = inst::instrument_ets(ast, ets);
    auto [full, p2] = inst::instrument_coverage(with_ets);
    engine::FuzzConfig fc;
    fc.clock = engine::ClockKind::Executions;
    fc.timeout_s = 300.0;
    fc.rng_seed = 11;
    engine::CampaignResult r = engine::fuzz_loop(full, ets, fc);
    c.require(r.found, "magic-2 target not found within budget");
    if (r.found) {
      c.require(engine::validate_crash(full, r.crash_input, ets),
                "reported crash input fails re-validation");
      c.require(engine::is_target_panic(r.crash_pos, ets),
                "reported panic is outside the target block");
    }
  }
  return report(8, c, seconds_since(start));
}

bool criterion9_determinism() {
  auto start = Clock::now();
  Check c{"identical seeds on the executions clock give identical campaign.json"};
  bench::SuiteProgram sp = bench::benchmark_suite()[0];  // a_shallow
  lang::Ast ast = lang::parse(sp.source, sp.file);
  pre::EnhancedTargetSequence ets =
      pre::compute_ets(model_of(ast), {target_at(sp.file, sp.target_line)});
  auto [with_ets, p1] = inst::instrument_ets(ast, ets);
  auto [full, p2] = inst::instrument_coverage(with_ets);

  auto run_once = [&](const fs::path& dir) {
    fs::remove_all(dir);
    engine::FuzzConfig fc;
    fc.clock = engine::ClockKind::Executions;
    fc.timeout_s = 300.0;
    fc.rng_seed = 424242;
    fc.out_dir = dir.string();
    return engine::fuzz_loop(full, ets, fc);
  };
  fs::path d1 = fs::temp_directory_path() / "difuzz_acc9_a";
  fs::path d2 = fs::temp_directory_path() / "difuzz_acc9_b";
  engine::CampaignResult r1 = run_once(d1);
  engine::CampaignResult r2 = run_once(d2);
  c.require(r1.found == r2.found && r1.tte_executions == r2.tte_executions,
            "campaign results diverged");
  c.require(slurp(d1 / "campaign.json") == slurp(d2 / "campaign.json"),
            "campaign.json differs between identical runs");
  fs::remove_all(d1);
  fs::remove_all(d2);
  return report(9, c, seconds_since(start));
}

}  // namespace

int main() {
  fs::path suite_dir = fs::temp_directory_path() / "difuzz_acceptance_suite";
  fs::remove_all(suite_dir);
  bench::gen_benchmark_suite(suite_dir.string());

  bool ok = true;
  ok &= criterion1_dot_round_trip();
  ok &= criterion2_distance_oracle();
  ok &= criterion3_semantics_preservation();
  ok &= criterion4_duplicate_position();
  ok &= criterion5_annealing_invariants();
  ok &= criterion6_ablation(suite_dir);
  ok &= criterion7_negative_control(suite_dir);
  ok &= criterion8_crash_validation();
  ok &= criterion9_determinism();

  fs::remove_all(suite_dir);
  std::printf("%s\n", ok ? "ALL CRITERIA PASSED" : "SOME CRITERIA FAILED");
  return ok ? 0 : 1;
}
