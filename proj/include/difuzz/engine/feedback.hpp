#pragma once

#include <array>
#include <limits>
#include <map>
#include <set>

#include "difuzz/engine/executor.hpp"
#include "difuzz/preprocess/ets.hpp"

namespace difuzz::engine {

inline constexpr double kInfiniteDistance = std::numeric_limits<double>::infinity();

// Novelty: some cell's bucket exceeds the historical maximum for that cell.
class CoverageHistory {
 public:
  bool is_novel_and_update(const CoverageMap& map) {
    bool novel = false;
    for (std::size_t i = 0; i < kMapSize; ++i) {
      std::uint8_t b = bucket(map.cells[i]);
      if (b > max_bucket_[i]) {
        max_bucket_[i] = b;
        novel = true;
      }
    }
    return novel;
  }

  bool would_admit(const CoverageMap& map) const {
    for (std::size_t i = 0; i < kMapSize; ++i)
      if (bucket(map.cells[i]) > max_bucket_[i]) return true;
    return false;
  }

 private:
  std::array<std::uint8_t, kMapSize> max_bucket_{};
};

// Distance of one execution: mean over the distinct ETS blocks the trace hit
// of d(b) = 1/weight(b) - 1; infinity for an empty trace.
inline double seed_distance(const EtsTrace& trace, const pre::EnhancedTargetSequence& ets) {
  if (trace.hits.empty()) return kInfiniteDistance;
  std::set<std::uint32_t> distinct(trace.hits.begin(), trace.hits.end());
  double sum = 0.0;
  std::size_t n = 0;
  for (std::uint32_t id : distinct) {
    const pre::EtsBlock* b = ets.find_block(static_cast<int>(id));
    if (!b) continue;  // instrumentation soundness makes this unreachable
    sum += 1.0 / b->weight - 1.0;
    ++n;
  }
  if (n == 0) return kInfiniteDistance;
  return sum / static_cast<double>(n);
}

// Novelty on the directed side: a strictly better best weight, or a
// previously unseen ETS block.
class EtsHistory {
 public:
  bool is_novel_and_update(const EtsTrace& trace) {
    bool novel = false;
    for (std::uint32_t id : trace.hits) {
      if (seen_.insert(id).second) novel = true;
    }
    double w = best_weight_of(trace);
    if (w > best_weight_) {
      best_weight_ = w;
      novel = true;
    }
    return novel;
  }

  bool would_admit(const EtsTrace& trace) const {
    for (std::uint32_t id : trace.hits)
      if (!seen_.count(id)) return true;
    return best_weight_of(trace) > best_weight_;
  }

  void attach(const pre::EnhancedTargetSequence* ets) { ets_ = ets; }
  double best_weight() const { return best_weight_; }

  double best_weight_of(const EtsTrace& trace) const {
    double best = 0.0;
    if (!ets_) return best;
    for (std::uint32_t id : trace.hits) {
      const pre::EtsBlock* b = ets_->find_block(static_cast<int>(id));
      if (b && b->weight > best) best = b->weight;
    }
    return best;
  }

 private:
  const pre::EnhancedTargetSequence* ets_ = nullptr;
  std::set<std::uint32_t> seen_;
  double best_weight_ = 0.0;
};

}  // namespace difuzz::engine
