#pragma once

#include <cstdint>
#include <vector>

#include "mobcl/dataset.hpp"

namespace mobcl {

struct SynthConfig {
  GridSpec grid{20, 20, 500.0};
  TimeSpec time{48, 75};
  int num_users = 100;
  double commuter_frac = 0.4;
  double explorer_frac = 0.3;
  double random_frac = 0.3;
  double noise_prob = 0.05;  // per-slot chance of a random detour
  double sparsity = 0.8;     // fraction of slots dropped
  int poi_categories = 85;
  std::uint64_t seed = 1;

  void check() const;
};

/// Deterministic synthetic population: commuters oscillate home/work on a
/// weekday schedule, explorers walk among ~10 anchor cells, random users
/// take uniform steps. Slots are dropped iid at the sparsity rate. Per-user
/// seeds are derived from (seed, uid) so output is independent of iteration
/// order.
Dataset synth_generate(const SynthConfig& cfg);

struct EntropySweepRow {
  double noise_prob = 0.0;
  double mean_h_norm = 0.0;
};

/// Mean per-user normalized entropy for each noise level (same base config).
std::vector<EntropySweepRow> synth_entropy_sweep(
    const SynthConfig& cfg, const std::vector<double>& noise_levels);

}  // namespace mobcl
