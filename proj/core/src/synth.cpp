#include "mobcl/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "mobcl/entropy.hpp"

namespace mobcl {

void SynthConfig::check() const {
  grid.check();
  time.check();
  if (num_users < 1) throw DataError("num_users must be >= 1");
  double frac_sum = commuter_frac + explorer_frac + random_frac;
  if (std::abs(frac_sum - 1.0) > 1e-9)
    throw DataError("archetype fractions must sum to 1");
  if (noise_prob < 0.0 || noise_prob > 1.0 || sparsity < 0.0 ||
      sparsity >= 1.0)
    throw DataError("noise_prob in [0,1], sparsity in [0,1)");
}

namespace {

enum class Archetype { commuter, explorer, random_walker };

std::uint64_t user_seed(std::uint64_t base, int user_index) {
  // splitmix64 over (base, index) so generation order does not matter
  std::uint64_t z = base + 0x9e3779b97f4a7c15ull *
                               (static_cast<std::uint64_t>(user_index) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

struct Cell {
  int x;
  int y;
};

Cell random_cell(std::mt19937_64& rng, const GridSpec& grid) {
  std::uniform_int_distribution<int> dx(0, grid.x_max());
  std::uniform_int_distribution<int> dy(0, grid.y_max());
  return {dx(rng), dy(rng)};
}

Trajectory generate_user(const SynthConfig& cfg, int user_index,
                         Archetype archetype, PoiTable* poi) {
  std::mt19937_64 rng(user_seed(cfg.seed, user_index));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Trajectory traj;
  traj.uid = "u" + std::to_string(user_index);

  Cell home = random_cell(rng, cfg.grid);
  Cell work = random_cell(rng, cfg.grid);
  std::vector<Cell> anchors;
  for (int a = 0; a < 10; ++a) anchors.push_back(random_cell(rng, cfg.grid));
  Cell current = home;

  // POI mass around this user's anchors, seeded by the same stream
  if (poi) {
    std::uniform_int_distribution<int> cat(0, poi->num_categories - 1);
    std::uniform_int_distribution<int> cnt(1, 20);
    for (const Cell& c : {home, work, anchors[0], anchors[1]}) {
      auto& vec = poi->cells[PoiTable::cell_key(c.x, c.y, cfg.grid)];
      if (vec.empty()) vec.assign(poi->num_categories, 0);
      for (int j = 0; j < 3; ++j) vec[cat(rng)] += cnt(rng);
    }
  }

  const int work_start = cfg.time.slots_per_day * 9 / 24;
  const int work_end = cfg.time.slots_per_day * 17 / 24;

  for (int d = 0; d < cfg.time.num_days; ++d) {
    bool weekday = (d % 7) < 5;
    for (int t = 0; t < cfg.time.slots_per_day; ++t) {
      switch (archetype) {
        case Archetype::commuter:
          current = (weekday && t >= work_start && t < work_end) ? work : home;
          break;
        case Archetype::explorer:
          if (unit(rng) < 0.3) {
            std::uniform_int_distribution<std::size_t> pick(0, anchors.size() - 1);
            current = anchors[pick(rng)];
          }
          break;
        case Archetype::random_walker:
          current = random_cell(rng, cfg.grid);
          break;
      }
      // noise and detour-target draws happen for every slot so changing
      // noise_prob only swaps cells where the detour fires
      double noise_draw = unit(rng);
      Cell detour = random_cell(rng, cfg.grid);
      Cell emit = noise_draw < cfg.noise_prob ? detour : current;
      bool keep = unit(rng) >= cfg.sparsity;
      if (keep) traj.points.push_back({d, t, emit.x, emit.y});
    }
  }
  if (traj.points.empty())
    traj.points.push_back({0, 0, home.x, home.y});
  return traj;
}

}  // namespace

Dataset synth_generate(const SynthConfig& cfg) {
  cfg.check();
  Dataset ds;
  ds.grid = cfg.grid;
  ds.time = cfg.time;
  PoiTable poi;
  poi.num_categories = cfg.poi_categories;

  const int n_commuter =
      static_cast<int>(std::round(cfg.commuter_frac * cfg.num_users));
  const int n_explorer =
      static_cast<int>(std::round(cfg.explorer_frac * cfg.num_users));
  for (int u = 0; u < cfg.num_users; ++u) {
    Archetype a = u < n_commuter                ? Archetype::commuter
                  : u < n_commuter + n_explorer ? Archetype::explorer
                                                : Archetype::random_walker;
    Trajectory traj = generate_user(cfg, u, a, &poi);
    ds.trajectories[traj.uid] = std::move(traj);
  }
  ds.poi = std::move(poi);
  return ds;
}

std::vector<EntropySweepRow> synth_entropy_sweep(
    const SynthConfig& cfg, const std::vector<double>& noise_levels) {
  std::vector<EntropySweepRow> table;
  for (double level : noise_levels) {
    SynthConfig c = cfg;
    c.noise_prob = level;
    Dataset ds = synth_generate(c);
    double sum = 0.0;
    for (const auto& [uid, traj] : ds.trajectories)
      sum += trajectory_entropy(traj, ds.grid);
    table.push_back({level, sum / static_cast<double>(ds.num_users())});
  }
  return table;
}

}  // namespace mobcl
