#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "difuzz/lang/interp.hpp"

namespace difuzz::engine {

inline constexpr std::size_t kMapSize = 65536;
inline constexpr std::size_t kMaxTraceLen = 65536;

// AFL-style hit count classes: {1, 2, 3, 4-7, 8-15, 16-31, 32-127, >=128}.
inline std::uint8_t bucket(std::uint8_t count) {
  if (count == 0) return 0;
  if (count == 1) return 1;
  if (count == 2) return 2;
  if (count == 3) return 3;
  if (count <= 7) return 4;
  if (count <= 15) return 5;
  if (count <= 31) return 6;
  if (count <= 127) return 7;
  return 8;
}

struct CoverageMap {
  std::array<std::uint8_t, kMapSize> cells{};

  void record_guard(std::uint32_t guard_id, std::uint32_t& prev) {
    std::size_t idx = static_cast<std::size_t>((prev >> 1) ^ guard_id) % kMapSize;
    if (cells[idx] != 0xFF) ++cells[idx];
    prev = guard_id;
  }

  std::size_t nonzero_count() const {
    std::size_t n = 0;
    for (auto c : cells)
      if (c) ++n;
    return n;
  }
};

struct EtsTrace {
  std::vector<std::uint32_t> hits;  // in execution order
  bool truncated = false;

  void record(std::uint32_t block_id) {
    if (hits.size() >= kMaxTraceLen) {
      truncated = true;
      return;
    }
    hits.push_back(block_id);
  }
};

struct ExecLimits {
  std::uint64_t step_limit = lang::kDefaultStepLimit;
};

struct Observation {
  lang::ExecOutcome outcome;
  CoverageMap map;
  EtsTrace trace;
};

// One in-process "forkserver" round: fresh maps, hooks wired to the
// interpreter, previous-guard state reset at start.
class Executor {
 public:
  explicit Executor(const lang::Ast& ast) : interp_(ast) {}

  Observation run(const std::vector<std::uint8_t>& input,
                  const ExecLimits& limits = {}) const {
    Observation obs;
    std::uint32_t prev = 0;
    lang::InstrumentationHooks hooks;
    hooks.on_guard = [&obs, &prev](std::uint32_t id) { obs.map.record_guard(id, prev); };
    hooks.on_ets = [&obs](std::uint32_t id) { obs.trace.record(id); };
    obs.outcome = interp_.run(input, limits.step_limit, &hooks);
    return obs;
  }

 private:
  lang::Interpreter interp_;
};

}  // namespace difuzz::engine
