#include "mobcl/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mobcl {

namespace {

int slot_index(const TrajectoryPoint& p, const TimeSpec& time) {
  return p.dId * time.slots_per_day + p.tId;
}

std::vector<int> top_k_categories(const std::vector<int>* counts, int k) {
  std::vector<int> out;
  if (counts) {
    std::vector<int> cats;
    for (int c = 0; c < static_cast<int>(counts->size()); ++c)
      if ((*counts)[c] > 0) cats.push_back(c);
    // largest count first, ties by ascending category id
    std::stable_sort(cats.begin(), cats.end(), [&](int a, int b) {
      return (*counts)[a] != (*counts)[b] ? (*counts)[a] > (*counts)[b]
                                          : a < b;
    });
    for (int i = 0; i < k && i < static_cast<int>(cats.size()); ++i)
      out.push_back(cats[i]);
  }
  while (static_cast<int>(out.size()) < k) out.push_back(kNullPoi);
  return out;
}

}  // namespace

std::vector<TokenFeatures> derive_token_features(const Trajectory& traj,
                                                 const PoiTable* poi,
                                                 const FeatureConfig& cfg,
                                                 const GridSpec& grid,
                                                 const TimeSpec& time) {
  if (traj.points.empty()) throw DataError("derive_token_features: empty");
  std::vector<TokenFeatures> out;
  out.reserve(traj.points.size());
  for (std::size_t i = 0; i < traj.points.size(); ++i) {
    const auto& p = traj.points[i];
    TokenFeatures f;
    f.dId = p.dId;
    f.tId = p.tId;
    f.x = p.x;
    f.y = p.y;
    f.day_of_week = (p.dId + cfg.week_anchor) % 7;
    if (i == 0) {
      f.timedelta = 0;
    } else {
      int gap = slot_index(p, time) - slot_index(traj.points[i - 1], time);
      f.timedelta = std::min(gap, cfg.timedelta_cap);
    }
    f.day_night =
        (p.tId >= cfg.day_slot_lo && p.tId <= cfg.day_slot_hi) ? 1 : 0;
    f.top_k_poi =
        top_k_categories(poi ? poi->find(p.x, p.y, grid) : nullptr, cfg.top_k);
    out.push_back(std::move(f));
  }
  return out;
}

int distance_class(const TrajectoryPoint& p, const TrajectoryPoint& q,
                   const GridSpec& grid) {
  double dx = q.x - p.x;
  double dy = q.y - p.y;
  double dist = grid.cell_size_m * std::sqrt(dx * dx + dy * dy);
  if (dist < 500.0) return 0;
  if (dist < 1000.0) return 1;
  if (dist < 3500.0) return 2;
  return 3;
}

int direction_class(const TrajectoryPoint& p, const TrajectoryPoint& q) {
  int dx = q.x - p.x;
  int dy = q.y - p.y;
  if (dx == 0 && dy == 0) return kDirStationary;
  double deg = std::atan2(static_cast<double>(dy), static_cast<double>(dx)) *
               180.0 / std::numbers::pi;
  double a = deg + 22.5;  // shift so sector 0 (E) starts at 0
  while (a < 0.0) a += 360.0;
  while (a >= 360.0) a -= 360.0;
  int sector = static_cast<int>(a / 45.0);
  return std::min(sector, 7);
}

AuxLabels aux_labels(const TrajectoryPoint& prev, const TrajectoryPoint& cur,
                     const GridSpec& grid) {
  return {distance_class(prev, cur, grid), direction_class(prev, cur)};
}

const char* direction_name(int dir_class) {
  static const char* names[] = {"E",  "NE", "N", "NW", "W",
                                "SW", "S",  "SE", "stationary"};
  return (dir_class >= 0 && dir_class <= 8) ? names[dir_class] : "?";
}

ModelSample build_model_sample(const Trajectory& traj, const PoiTable* poi,
                               const FeatureConfig& cfg, int observe_days,
                               int horizon_days, const GridSpec& grid,
                               const TimeSpec& time) {
  if (horizon_days < 1) throw DataError("build_model_sample: horizon 0");

  Trajectory window;
  window.uid = traj.uid;
  std::size_t num_observed = 0;
  for (const auto& p : traj.points) {
    if (p.dId < observe_days) {
      window.points.push_back(p);
      ++num_observed;
    } else if (p.dId < observe_days + horizon_days) {
      window.points.push_back(p);
    }
  }
  std::size_t num_target = window.points.size() - num_observed;
  if (num_observed == 0)
    throw DataError("build_model_sample: empty observation window for uid " +
                    traj.uid);
  if (num_target == 0)
    throw DataError("build_model_sample: empty target window for uid " +
                    traj.uid);

  auto features = derive_token_features(window, poi, cfg, grid, time);

  ModelSample sample;
  sample.uid = traj.uid;
  sample.num_observed = num_observed;
  sample.tokens = std::move(features);
  sample.masked.assign(sample.tokens.size(), false);
  for (std::size_t i = num_observed; i < sample.tokens.size(); ++i) {
    sample.masked[i] = true;
    const auto& prev = window.points[i - 1];  // ground-truth predecessor
    const auto& cur = window.points[i];
    sample.loc_labels.push_back(cur.x * (grid.y_max() + 1) + cur.y);
    auto aux = aux_labels(prev, cur, grid);
    sample.dist_labels.push_back(aux.dist_class);
    sample.dir_labels.push_back(aux.dir_class);
  }
  return sample;
}

}  // namespace mobcl
