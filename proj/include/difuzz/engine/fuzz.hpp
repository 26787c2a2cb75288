#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "difuzz/engine/executor.hpp"
#include "difuzz/engine/feedback.hpp"
#include "difuzz/engine/mutate.hpp"
#include "difuzz/engine/schedule.hpp"
#include "difuzz/lang/parse.hpp"
#include "difuzz/preprocess/ets.hpp"
#include "json.hpp"

namespace difuzz::engine {

enum class FuzzMode { Directed, CoverageOnly };
enum class ClockKind { Wall, Executions };

inline const char* to_string(FuzzMode m) {
  return m == FuzzMode::Directed ? "directed" : "coverage";
}

inline FuzzMode parse_mode(const std::string& s) {
  if (s == "directed") return FuzzMode::Directed;
  if (s == "coverage" || s == "coverage-only") return FuzzMode::CoverageOnly;
  throw std::runtime_error("unknown fuzz mode: " + s);
}

struct FuzzConfig {
  FuzzMode mode = FuzzMode::Directed;
  double timeout_s = 60.0;
  std::uint64_t rng_seed = 1;
  SchedulerConfig sched;
  ClockKind clock = ClockKind::Wall;
  double execs_per_virtual_s = 1000.0;  // Executions clock: 1000 execs = 1 s
  std::uint64_t step_limit = lang::kDefaultStepLimit;
  std::vector<Input> seeds;
  std::string out_dir;  // empty: no artifacts written
};

struct CorpusEntry {
  Input input;
  double exec_ms = 0.0;
  double seed_distance = kInfiniteDistance;
  double best_weight = 0.0;
  double found_at_s = 0.0;
  std::string novelty;  // "seed", "coverage", "ets", or "coverage+ets"
};

struct CampaignResult {
  bool found = false;
  double tte_s = 0.0;
  std::uint64_t tte_executions = 0;
  std::uint64_t executions = 0;
  std::size_t corpus_size = 0;
  Input crash_input;
  lang::SourcePos crash_pos;
  std::string crash_message;
};

// Concatenates per-file ASTs into one executable program. Function names must
// be globally unique apart from duplicate-position instances of one file.
inline lang::Ast merge_program(const std::vector<lang::Ast>& files) {
  if (files.empty()) throw std::runtime_error("empty program");
  lang::Ast out;
  out.file = files.front().file;
  for (const auto& ast : files) {
    for (const auto& f : ast.functions) {
      for (const auto& g : out.functions)
        if (g.name == f.name && g.pos.file != f.pos.file)
          throw std::runtime_error("duplicate function across files: " + f.name);
      lang::Function copy;
      copy.name = f.name;
      copy.params = f.params;
      copy.body = lang::clone_block(f.body);
      copy.pos = f.pos;
      copy.header_line = f.header_line;
      copy.end_line = f.end_line;
      copy.instances = f.instances;
      copy.occurrence = f.occurrence;
      out.functions.push_back(std::move(copy));
    }
    out.next_stmt_id = std::max(out.next_stmt_id, ast.next_stmt_id);
  }
  int mains = 0;
  for (const auto& f : out.functions)
    if (f.name == "main") ++mains;
  if (mains != 1)
    throw std::runtime_error("program must define exactly one 'main' function");
  return out;
}

// Parses every .mp file of a directory (sorted by name) into one program.
inline lang::Ast load_program(const std::string& dir) {
  namespace fs = std::filesystem;
  std::vector<fs::path> sources;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".mp") sources.push_back(entry.path());
  std::sort(sources.begin(), sources.end());
  if (sources.empty()) throw std::runtime_error("no .mp files in " + dir);
  std::vector<lang::Ast> files;
  for (const auto& p : sources) {
    std::ifstream in(p, std::ios::binary);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    files.push_back(lang::parse(text, p.filename().string()));
  }
  return merge_program(files);
}

// A panic counts only when it lands inside a target's block line range; exact
// target line matches are accepted as a fallback when the ETS carries no
// block for that target (it always should).
inline bool is_target_panic(const lang::SourcePos& pos,
                            const pre::EnhancedTargetSequence& ets) {
  for (const auto& t : ets.targets) {
    if (t.file != pos.file) continue;
    bool have_block = false;
    for (const auto& b : ets.blocks) {
      if (b.file != t.file) continue;
      if (t.line < b.start_line || t.line > b.end_line) continue;
      if (b.weight < 1.0) continue;  // weight 1 <=> distance 0 <=> target block
      have_block = true;
      if (pos.line >= b.start_line && pos.line <= b.end_line) return true;
    }
    if (!have_block && pos.line == t.line) return true;
  }
  return false;
}

// Re-executes a stored crash input and checks the panic lands at a target.
inline bool validate_crash(const lang::Ast& program, const Input& crash_input,
                           const pre::EnhancedTargetSequence& ets,
                           std::uint64_t step_limit = lang::kDefaultStepLimit) {
  Executor ex(program);
  ExecLimits limits;
  limits.step_limit = step_limit;
  Observation obs = ex.run(crash_input, limits);
  if (obs.outcome.status.kind != lang::ExecStatus::Kind::Panic) return false;
  return is_target_panic(obs.outcome.status.panic_pos, ets);
}

namespace detail {

class CampaignClock {
 public:
  CampaignClock(ClockKind kind, double execs_per_virtual_s)
      : kind_(kind),
        rate_(execs_per_virtual_s),
        start_(std::chrono::steady_clock::now()) {}

  void count_execution() { ++execs_; }
  std::uint64_t executions() const { return execs_; }

  double now_s() const {
    if (kind_ == ClockKind::Executions) return static_cast<double>(execs_) / rate_;
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  ClockKind kind_;
  double rate_;
  std::uint64_t execs_ = 0;
  std::chrono::steady_clock::time_point start_;
};

inline std::uint64_t fnv1a(const Input& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (std::uint8_t b : data) {
    h ^= b;
    h *= 1099511628211ULL;
  }
  return h;
}

inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Energy-weighted draw; all-zero weights degrade to uniform.
inline std::size_t weighted_pick(const std::vector<double>& weights, Rng& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (total <= 0.0) return static_cast<std::size_t>(below(rng, weights.size()));
  double r = uniform01(rng) * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    r -= weights[i];
    if (r < 0.0) return i;
  }
  return weights.size() - 1;
}

}  // namespace detail

class FuzzCampaign {
 public:
  FuzzCampaign(const lang::Ast& program, const pre::EnhancedTargetSequence& ets,
               FuzzConfig config)
      : program_(&program), ets_(&ets), cfg_(std::move(config)), executor_(program) {
    ets_history_.attach(ets_);
  }

  CampaignResult run() {
    detail::CampaignClock clock(cfg_.clock, cfg_.execs_per_virtual_s);
    Rng rng(cfg_.rng_seed);
    CampaignResult result;

    std::vector<Input> seeds;
    seeds.emplace_back();  // the empty input
    for (const auto& s : cfg_.seeds) seeds.push_back(s);
    for (const auto& s : seeds) {
      if (try_input(s, clock, result, "seed")) break;
    }

    std::size_t round_robin = 0;
    while (!result.found && clock.now_s() < cfg_.timeout_s) {
      std::size_t pick;
      std::uint64_t budget;
      if (cfg_.mode == FuzzMode::Directed) {
        SchedulerState st = scheduler_snapshot(clock.now_s());
        std::vector<double> energies(corpus_.size());
        for (std::size_t i = 0; i < corpus_.size(); ++i)
          energies[i] = annealing_energy(corpus_[i].seed_distance, st);
        pick = detail::weighted_pick(energies, rng);
        budget = mutation_budget(energies[pick], cfg_.sched);
      } else {
        pick = round_robin++ % corpus_.size();
        budget = static_cast<std::uint64_t>(cfg_.sched.base_budget);
      }
      const Input base = corpus_[pick].input;  // corpus may grow during the round
      for (std::uint64_t i = 0; i < budget; ++i) {
        if (clock.now_s() >= cfg_.timeout_s) break;
        Input mutant = mutate(base, rng, corpus_inputs_);
        if (try_input(mutant, clock, result, "")) break;
      }
    }

    result.executions = clock.executions();
    result.corpus_size = corpus_.size();
    if (!cfg_.out_dir.empty()) write_artifacts(result);
    return result;
  }

  const std::vector<CorpusEntry>& corpus() const { return corpus_; }

 private:
  SchedulerState scheduler_snapshot(double elapsed_s) const {
    double min_d = kInfiniteDistance, max_d = 0.0;
    bool any = false;
    for (const auto& e : corpus_) {
      if (std::isinf(e.seed_distance)) continue;
      any = true;
      min_d = std::min(min_d, e.seed_distance);
      max_d = std::max(max_d, e.seed_distance);
    }
    if (!any) min_d = max_d = 0.0;
    return scheduler_state(elapsed_s, min_d, max_d, cfg_.sched);
  }

  // Executes one input; admits it on feedback novelty; reports whether the
  // campaign is over (validated target crash found).
  bool try_input(const Input& input, detail::CampaignClock& clock, CampaignResult& result,
                 const char* forced_novelty) {
    ExecLimits limits;
    limits.step_limit = cfg_.step_limit;
    auto wall_before = std::chrono::steady_clock::now();
    Observation obs = executor_.run(input, limits);
    clock.count_execution();
    double exec_ms = 0.0;
    if (cfg_.clock == ClockKind::Wall)
      exec_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                    wall_before)
              .count();

    if (obs.outcome.status.kind == lang::ExecStatus::Kind::Panic) {
      if (is_target_panic(obs.outcome.status.panic_pos, *ets_) &&
          validate_crash(*program_, input, *ets_, cfg_.step_limit)) {
        result.found = true;
        result.tte_s = clock.now_s();
        result.tte_executions = clock.executions();
        result.crash_input = input;
        result.crash_pos = obs.outcome.status.panic_pos;
        result.crash_message = obs.outcome.status.panic_message;
        return true;
      }
      stray_crashes_.push_back(input);  // non-target panic: kept, not counted
    }

    bool cov_novel = coverage_history_.is_novel_and_update(obs.map);
    bool ets_novel = false;
    if (cfg_.mode == FuzzMode::Directed)
      ets_novel = ets_history_.is_novel_and_update(obs.trace);
    bool admit = cov_novel || ets_novel || forced_novelty[0] != '\0';
    if (!admit) return false;

    CorpusEntry entry;
    entry.input = input;
    entry.exec_ms = exec_ms;
    entry.seed_distance = seed_distance(obs.trace, *ets_);
    entry.best_weight = ets_history_.best_weight_of(obs.trace);
    entry.found_at_s = clock.now_s();
    if (forced_novelty[0] != '\0')
      entry.novelty = forced_novelty;
    else if (cov_novel && ets_novel)
      entry.novelty = "coverage+ets";
    else
      entry.novelty = cov_novel ? "coverage" : "ets";
    corpus_inputs_.push_back(entry.input);
    corpus_.push_back(std::move(entry));
    return false;
  }

  static std::string hex_bytes(const Input& in) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    s.reserve(in.size() * 2);
    for (std::uint8_t b : in) {
      s.push_back(digits[b >> 4]);
      s.push_back(digits[b & 0xF]);
    }
    return s;
  }

  void write_artifacts(const CampaignResult& result) const {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(cfg_.out_dir) / "corpus");
    fs::create_directories(fs::path(cfg_.out_dir) / "crash");

    nlohmann::json j;
    j["mode"] = to_string(cfg_.mode);
    j["rng_seed"] = cfg_.rng_seed;
    j["clock"] = cfg_.clock == ClockKind::Wall ? "wall" : "executions";
    j["timeout_s"] = cfg_.timeout_s;
    j["found"] = result.found;
    j["executions"] = result.executions;
    j["corpus_size"] = result.corpus_size;
    if (result.found) {
      j["tte_s"] = result.tte_s;
      j["tte_executions"] = result.tte_executions;
      j["crash"] = {{"input", hex_bytes(result.crash_input)},
                    {"file", result.crash_pos.file},
                    {"line", result.crash_pos.line},
                    {"message", result.crash_message}};
    } else {
      j["tte_s"] = nullptr;
    }
    j["corpus"] = nlohmann::json::array();
    char name[32];
    for (std::size_t i = 0; i < corpus_.size(); ++i) {
      const CorpusEntry& e = corpus_[i];
      std::snprintf(name, sizeof name, "%06zu", i);
      nlohmann::json entry;
      entry["name"] = name;
      entry["size"] = e.input.size();
      std::snprintf(name, sizeof name, "%016llx",
                    static_cast<unsigned long long>(detail::fnv1a(e.input)));
      entry["hash"] = name;
      entry["seed_distance"] =
          std::isinf(e.seed_distance) ? nlohmann::json("inf") : nlohmann::json(e.seed_distance);
      entry["best_weight"] = e.best_weight;
      entry["found_at_s"] = e.found_at_s;
      entry["novelty"] = e.novelty;
      j["corpus"].push_back(std::move(entry));
      std::snprintf(name, sizeof name, "%06zu", i);
      std::ofstream out(fs::path(cfg_.out_dir) / "corpus" / name, std::ios::binary);
      out.write(reinterpret_cast<const char*>(e.input.data()),
                static_cast<std::streamsize>(e.input.size()));
    }
    if (result.found) {
      std::ofstream out(fs::path(cfg_.out_dir) / "crash" / "crash_000000", std::ios::binary);
      out.write(reinterpret_cast<const char*>(result.crash_input.data()),
                static_cast<std::streamsize>(result.crash_input.size()));
    }
    for (std::size_t i = 0; i < stray_crashes_.size(); ++i) {
      std::snprintf(name, sizeof name, "stray_%06zu", i);
      std::ofstream out(fs::path(cfg_.out_dir) / "crash" / name, std::ios::binary);
      out.write(reinterpret_cast<const char*>(stray_crashes_[i].data()),
                static_cast<std::streamsize>(stray_crashes_[i].size()));
    }
    std::ofstream out(fs::path(cfg_.out_dir) / "campaign.json", std::ios::binary);
    out << j.dump(2) << "\n";
  }

  const lang::Ast* program_;
  const pre::EnhancedTargetSequence* ets_;
  FuzzConfig cfg_;
  Executor executor_;
  CoverageHistory coverage_history_;
  EtsHistory ets_history_;
  std::vector<CorpusEntry> corpus_;
  std::vector<Input> corpus_inputs_;
  std::vector<Input> stray_crashes_;
};

inline CampaignResult fuzz_loop(const lang::Ast& program,
                                const pre::EnhancedTargetSequence& ets,
                                const FuzzConfig& config) {
  FuzzCampaign campaign(program, ets, config);
  return campaign.run();
}

}  // namespace difuzz::engine
