#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "difuzz/engine/feedback.hpp"

namespace difuzz::engine {

struct SchedulerConfig {
  double t_exploit_s = 60.0;     // time to reach the exploitation regime
  double cooling_base = 20.0;    // temperature = base^(-elapsed / t_exploit)
  int base_budget = 64;          // mutations at energy 0.5
  double budget_exponent = 10.0; // budget = base * 2^(exp * (A - 0.5))
};

struct SchedulerState {
  double campaign_elapsed_s = 0.0;
  double temperature = 1.0;  // in (0, 1]
  double min_distance = 0.0;
  double max_distance = 0.0;
};

inline double temperature(double elapsed_s, const SchedulerConfig& cfg) {
  return std::pow(cfg.cooling_base, -elapsed_s / cfg.t_exploit_s);
}

inline SchedulerState scheduler_state(double elapsed_s, double min_d, double max_d,
                                      const SchedulerConfig& cfg) {
  SchedulerState st;
  st.campaign_elapsed_s = elapsed_s;
  st.temperature = temperature(elapsed_s, cfg);
  st.min_distance = min_d;
  st.max_distance = max_d;
  return st;
}

// Simulated-annealing energy in [0, 1]: exploration-neutral 0.5 at T = 1,
// converging to 1 - normalized_distance as T -> 0.
inline double annealing_energy(double seed_dist, const SchedulerState& st) {
  double norm;
  if (std::isinf(seed_dist)) {
    norm = 1.0;
  } else if (st.max_distance <= st.min_distance) {
    norm = 0.0;
  } else {
    norm = (seed_dist - st.min_distance) / (st.max_distance - st.min_distance);
    norm = std::clamp(norm, 0.0, 1.0);
  }
  double t = st.temperature;
  return (1.0 - norm) * (1.0 - t) + 0.5 * t;
}

inline std::uint64_t mutation_budget(double energy, const SchedulerConfig& cfg) {
  double raw = cfg.base_budget * std::pow(2.0, cfg.budget_exponent * (energy - 0.5));
  std::uint64_t budget = static_cast<std::uint64_t>(std::llround(raw));
  std::uint64_t hi = static_cast<std::uint64_t>(16) * static_cast<std::uint64_t>(cfg.base_budget);
  return std::clamp<std::uint64_t>(budget, 1, hi);
}

}  // namespace difuzz::engine
