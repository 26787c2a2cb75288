#include "catch_amalgamated.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "difuzz/bench/bench.hpp"
#include "difuzz/bench/report.hpp"
#include "difuzz/bench/suite.hpp"
#include "difuzz/lang/interp.hpp"
#include "difuzz/lang/parse.hpp"

using namespace difuzz;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("cells summarize trials into best, average and timeout rate") {
  std::vector<std::optional<double>> trials;
  for (int t = 1; t <= 9; ++t) trials.push_back(static_cast<double>(t));
  trials.push_back(std::nullopt);  // one timeout in ten
  bench::TteCell cell = bench::make_cell(trials);
  REQUIRE(cell.best_s);
  CHECK(*cell.best_s == 1.0);
  REQUIRE(cell.avg_s);
  CHECK(*cell.avg_s == 5.0);
  CHECK(cell.timeout_pct == 10.0);
  CHECK(cell.trials == 10);

  bench::TteCell all_to = bench::make_cell({std::nullopt, std::nullopt});
  CHECK_FALSE(all_to.best_s);
  CHECK_FALSE(all_to.avg_s);
  CHECK(all_to.timeout_pct == 100.0);

  bench::TteCell single = bench::make_cell({2.3});
  CHECK(*single.best_s == 2.3);
  CHECK(*single.avg_s == 2.3);
  CHECK(single.timeout_pct == 0.0);
}

TEST_CASE("report cells render the timeout conventions") {
  bench::TteCell cell = bench::make_cell({0.5, 12.0, std::nullopt, 11.2});
  CHECK(bench::detail::best_text(cell) == "0.5");
  CHECK(bench::detail::avg_text(cell) == "7.9 (25% TO)");
  bench::TteCell dead = bench::make_cell({std::nullopt, std::nullopt});
  CHECK(bench::detail::best_text(dead) == "TO");
  CHECK(bench::detail::avg_text(dead) == "TO (100% TO)");
  bench::TteCell clean = bench::make_cell({0.5, 12.0, 11.2, 7.9});
  CHECK(bench::detail::avg_text(clean) == "7.9");
}

TEST_CASE("the text table keeps columns aligned and rows per target") {
  bench::BenchReport report;
  report.modes = {engine::FuzzMode::Directed, engine::FuzzMode::CoverageOnly};
  bench::BenchRow row;
  row.program = "a_shallow";
  row.target_id = "a1";
  row.cells.push_back(bench::make_cell({0.5, 12.0, std::nullopt, 11.2}));
  row.cells.push_back(bench::make_cell({std::nullopt, std::nullopt}));
  report.rows.push_back(row);
  std::string text = bench::render_text(report);
  CHECK(text.find("Target") != std::string::npos);
  CHECK(text.find("directed best, s") != std::string::npos);
  CHECK(text.find("coverage avg, s") != std::string::npos);
  CHECK(text.find("0.5") != std::string::npos);
  CHECK(text.find("7.9 (25% TO)") != std::string::npos);
  CHECK(text.find("TO (100% TO)") != std::string::npos);
  // Separator line under the header.
  std::size_t first_nl = text.find('\n');
  CHECK(text[first_nl + 1] == '-');

  std::string csv = bench::render_csv(report);
  CHECK(csv.find("target,mode,trials,best_s,avg_s,timeout_pct") == 0);
  CHECK(csv.find("a1,directed,4,0.5,") != std::string::npos);
  CHECK(csv.find("a1,coverage,2,,,100") != std::string::npos);

  nlohmann::json j = nlohmann::json::parse(bench::render_json(report));
  REQUIRE(j["rows"].size() == 1);
  CHECK(j["rows"][0]["target"] == "a1");
  CHECK(j["rows"][0]["cells"][1]["best_s"].is_null());
}

TEST_CASE("the generated suite is loadable and semantically planted") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "difuzz_suite_test";
  fs::remove_all(dir);
  std::vector<bench::SuiteProgram> suite = bench::gen_benchmark_suite(dir.string());
  REQUIRE(suite.size() == 7);

  bench::BenchConfig cfg = bench::load_bench_config((dir / "bench.toml").string());
  CHECK(cfg.trials == 10);
  CHECK(cfg.jobs == 4);
  CHECK(cfg.rng_seed_base == 1000);
  CHECK(cfg.clock == engine::ClockKind::Wall);
  REQUIRE(cfg.modes.size() == 2);
  REQUIRE(cfg.programs.size() == suite.size());

  for (std::size_t i = 0; i < suite.size(); ++i) {
    const bench::SuiteProgram& p = suite[i];
    CHECK(cfg.programs[i].name == p.name);
    // Every program parses and its whole pipeline prepares cleanly.
    bench::PreparedProgram prep = bench::prepare_program(cfg.programs[i]);
    REQUIRE(prep.targets.size() == 1);
    CHECK(prep.targets[0].id == p.target_id);
    CHECK(prep.targets[0].line == p.target_line);
    // At least one full-weight block per program.
    bool full = false;
    for (const auto& b : prep.ets.blocks)
      if (b.weight == 1.0) full = true;
    CHECK(full);
  }

  // The magic-byte program panics exactly on its magic prefix.
  lang::Ast magic = lang::parse(suite[3].source, suite[3].file);  // b_magic_8
  lang::ExecOutcome hit =
      lang::Interpreter(magic).run({222, 173, 190, 239, 202, 254, 17, 88});
  REQUIRE(hit.status.kind == lang::ExecStatus::Kind::Panic);
  CHECK(hit.status.panic_pos.line == suite[3].target_line);
  lang::ExecOutcome miss =
      lang::Interpreter(magic).run({222, 173, 190, 239, 202, 254, 17, 89});
  CHECK(miss.status.kind == lang::ExecStatus::Kind::Normal);

  // The dead-code program's panic is genuinely unreachable: input bytes are
  // non-negative by construction.
  lang::Ast dead = lang::parse(suite[6].source, suite[6].file);
  for (int b : {0, 1, 127, 255}) {
    lang::ExecOutcome out =
        lang::Interpreter(dead).run({static_cast<std::uint8_t>(b)});
    REQUIRE(out.status.kind != lang::ExecStatus::Kind::Panic);
  }
  fs::remove_all(dir);
}

TEST_CASE("bench config rejects unknown keys and missing files") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "difuzz_benchcfg_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "bad.toml");
    out << "trials = 3\nturbo = true\n";
  }
  CHECK_THROWS_AS(bench::load_bench_config((dir / "bad.toml").string()), toml::Error);
  {
    std::ofstream out(dir / "badsec.toml");
    out << "[[mystery]]\nname = \"x\"\n";
  }
  CHECK_THROWS_AS(bench::load_bench_config((dir / "badsec.toml").string()), toml::Error);
  CHECK_THROWS_WITH(bench::load_bench_config((dir / "missing.toml").string()),
                    Catch::Matchers::ContainsSubstring("cannot open"));
  fs::remove_all(dir);
}

TEST_CASE("broken programs fail the pipeline with stage attribution") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "difuzz_pipeline_test";
  fs::remove_all(dir);
  fs::create_directories(dir / "src");
  {
    std::ofstream out(dir / "src" / "p.mp");
    out << "func main() {\n    print(\"ok\");\n}\n";
    std::ofstream tsv(dir / "targets.tsv");
    tsv << "t1\tp.mp:99\t60\n";  // line 99 matches no block
  }
  bench::BenchProgram bp{"p", (dir / "src").string(), (dir / "targets.tsv").string()};
  try {
    bench::prepare_program(bp);
    FAIL("expected PipelineError");
  } catch (const bench::PipelineError& e) {
    CHECK(e.program == "p");
    CHECK(e.stage == "preprocess");
  }
  fs::remove_all(dir);
}

TEST_CASE("a small benchmark run produces a complete report") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "difuzz_benchrun_test";
  fs::remove_all(dir);
  bench::gen_benchmark_suite(dir.string());

  bench::BenchConfig cfg = bench::load_bench_config((dir / "bench.toml").string());
  cfg.programs = {cfg.programs[0]};  // a_shallow only; keep the test fast
  cfg.trials = 3;
  cfg.jobs = 1;
  cfg.clock = engine::ClockKind::Executions;
  cfg.timeout_override_s = 300.0;  // 300k executions

  fs::path out = dir / "out";
  bench::BenchReport report = bench::run_bench(cfg, out.string());
  REQUIRE(report.rows.size() == 1);
  CHECK(report.rows[0].program == "a_shallow");
  CHECK(report.rows[0].target_id == "a1");
  REQUIRE(report.rows[0].cells.size() == 2);
  for (const auto& cell : report.rows[0].cells) {
    CHECK(cell.trials == 3);
    // The one-byte branch falls within the exec budget in both modes.
    CHECK(cell.timeout_pct == 0.0);
    REQUIRE(cell.best_s);
    CHECK(*cell.best_s > 0.0);
  }

  // Per-trial artifacts exist.
  CHECK(fs::exists(out / "trials" / "a_shallow" / "directed" / "trial_0" / "campaign.json"));
  CHECK(fs::exists(out / "trials" / "a_shallow" / "coverage" / "trial_2" / "campaign.json"));

  bench::write_report(report, out.string());
  CHECK(slurp(out / "report.txt").find("a1") != std::string::npos);
  CHECK(slurp(out / "report.csv").find("a1,directed,3,") != std::string::npos);
  nlohmann::json j = nlohmann::json::parse(slurp(out / "report.json"));
  CHECK(j["rows"][0]["target"] == "a1");
  fs::remove_all(dir);
}
