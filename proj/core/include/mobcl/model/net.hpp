#pragma once

#include <memory>
#include <random>
#include <utility>

#include "mobcl/features.hpp"
#include "mobcl/model/params.hpp"

namespace mobcl {

struct TaskLosses {
  double total = 0.0;
  double loc = 0.0;
  double dist = 0.0;
  double dir = 0.0;
};

struct HeadLogits {
  Matrix loc;   // [M x num_cells]
  Matrix dist;  // [M x 4]
  Matrix dir;   // [M x 9]
};

/// Masked encoder with 8-channel feature embeddings, a per-token feature
/// interaction block (MHSA across the 8 channels), a bidirectional
/// transformer encoder stack, and three classification heads. All math in
/// double precision with hand-written backprop.
class Network {
 public:
  explicit Network(ModelConfig cfg);

  const ModelConfig& config() const { return cfg_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  /// Forward pass without dropout; logits for every position.
  HeadLogits forward(const ModelSample& sample) const;

  /// Batch loss without touching gradients.
  TaskLosses loss(const std::vector<const ModelSample*>& batch) const;

  /// Batch loss with gradient accumulation into the parameter store.
  /// Pass a dropout RNG to enable dropout (cfg.dropout > 0).
  TaskLosses forward_backward(const std::vector<const ModelSample*>& batch,
                              std::mt19937_64* dropout_rng = nullptr);

  /// Argmax-decoded locations (plus aux diagnostics) for the target slots.
  struct Prediction {
    std::vector<TrajectoryPoint> points;
    std::vector<int> dist_classes;
    std::vector<int> dir_classes;
  };
  Prediction predict(const Trajectory& prefix, const PoiTable* poi,
                     int observe_days,
                     const std::vector<std::pair<int, int>>& target_slots) const;

  /// Central-difference gradient verification over a seeded parameter
  /// subset spanning every tensor; returns the max relative error.
  double grad_check(const ModelSample& sample, double eps = 1e-5,
                    std::size_t min_samples = 200, std::uint64_t seed = 7);

 private:
  ModelConfig cfg_;
  ParamStore params_;
};

/// Sample for inference: prefix tokens plus masked placeholders at the
/// requested (dId,tId) target slots (no labels).
ModelSample build_inference_sample(const Trajectory& prefix,
                                   const PoiTable* poi,
                                   const FeatureConfig& fcfg,
                                   const std::vector<std::pair<int, int>>& target_slots,
                                   const GridSpec& grid, const TimeSpec& time);

}  // namespace mobcl
