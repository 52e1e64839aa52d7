#pragma once

#include <array>
#include <vector>

#include "mobcl/dataset.hpp"

namespace mobcl {

struct FeatureConfig {
  int top_k = 3;
  int day_slot_lo = 12;  // inclusive; 06:00 with 48 half-hour slots
  int day_slot_hi = 43;  // inclusive; 21:30
  int timedelta_cap = 48;
  int week_anchor = 0;  // weekday assigned to dId = 0
};

/// Null POI id used to pad cells with fewer than k nonzero categories.
inline constexpr int kNullPoi = -1;

struct TokenFeatures {
  int dId = 0;
  int tId = 0;
  int x = 0;
  int y = 0;
  int day_of_week = 0;
  int timedelta = 0;  // slots since previous point, capped; 0 for the first
  int day_night = 0;  // 1 during the configured day window
  std::vector<int> top_k_poi;  // category ids, kNullPoi padded
};

// distance classes: 0 stationary, 1 short, 2 medium, 3 long
// direction classes: 0..7 = E,NE,N,NW,W,SW,S,SE; 8 = stationary
inline constexpr int kNumDistClasses = 4;
inline constexpr int kNumDirClasses = 9;
inline constexpr int kDirStationary = 8;

struct AuxLabels {
  int dist_class = 0;
  int dir_class = kDirStationary;
};

std::vector<TokenFeatures> derive_token_features(const Trajectory& traj,
                                                 const PoiTable* poi,
                                                 const FeatureConfig& cfg,
                                                 const GridSpec& grid,
                                                 const TimeSpec& time);

/// Bucket the Euclidean cell-center distance (in meters) between two points.
int distance_class(const TrajectoryPoint& p, const TrajectoryPoint& q,
                   const GridSpec& grid);

/// Compass sector of the displacement p -> q, +x = East, +y = North.
/// Eight 45-degree sectors centered on the compass directions; boundary
/// angles belong to the counterclockwise sector. (0,0) is stationary.
int direction_class(const TrajectoryPoint& p, const TrajectoryPoint& q);

AuxLabels aux_labels(const TrajectoryPoint& prev, const TrajectoryPoint& cur,
                     const GridSpec& grid);

const char* direction_name(int dir_class);

/// Encoder input plus per-masked-position labels. Observed tokens come
/// first; target tokens carry real temporal features but masked location
/// and POI ids.
struct ModelSample {
  std::string uid;
  std::vector<TokenFeatures> tokens;
  std::vector<bool> masked;          // per token
  std::vector<int> loc_labels;       // per masked token, cell id
  std::vector<int> dist_labels;      // per masked token
  std::vector<int> dir_labels;       // per masked token
  std::size_t num_observed = 0;

  std::size_t length() const { return tokens.size(); }
  std::size_t num_masked() const { return loc_labels.size(); }
};

/// Splits the trajectory at observe_days, truncates the target window to
/// horizon_days, and builds the masked sample. Throws DataError if either
/// window is empty.
ModelSample build_model_sample(const Trajectory& traj, const PoiTable* poi,
                               const FeatureConfig& cfg, int observe_days,
                               int horizon_days, const GridSpec& grid,
                               const TimeSpec& time);

}  // namespace mobcl
