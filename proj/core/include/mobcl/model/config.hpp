#pragma once

#include <cstdint>

#include "mobcl/dataset.hpp"
#include "mobcl/features.hpp"

namespace mobcl {

// 8 embedding channels per token
enum Channel : int {
  kChanLoc = 0,
  kChanDay = 1,
  kChanSlot = 2,
  kChanDow = 3,
  kChanTimedelta = 4,
  kChanDayNight = 5,
  kChanPoi = 6,       // top-k category embeddings merged by mean
  kChanReserved = 7,  // learned constant channel
  kNumChannels = 8,
};

struct ModelConfig {
  GridSpec grid{20, 20, 500.0};
  TimeSpec time{48, 75};
  FeatureConfig features;
  int poi_categories = 85;

  int embed_dim = 32;
  int num_layers = 2;
  int num_heads = 2;
  int ffn_dim = 64;
  double lambda_dist = 0.5;
  double lambda_dir = 0.8;
  double dropout = 0.0;
  std::uint64_t seed = 1;

  // vocab layout
  int loc_vocab() const { return grid.num_cells() + 1; }  // + MASK
  int loc_mask_id() const { return grid.num_cells(); }
  int poi_vocab() const { return poi_categories + 2; }  // + null + MASK
  int poi_null_id() const { return poi_categories; }
  int poi_mask_id() const { return poi_categories + 1; }
  int timedelta_vocab() const { return features.timedelta_cap + 1; }

  void check() const {
    grid.check();
    time.check();
    if (embed_dim < 1 || embed_dim % num_heads != 0)
      throw DataError("embed_dim must be a positive multiple of num_heads");
    if (lambda_dist < 0.0 || lambda_dist > 1.0 || lambda_dir < 0.0 ||
        lambda_dir > 1.0)
      throw DataError("loss weights must lie in [0,1]");
    if (dropout < 0.0 || dropout >= 1.0)
      throw DataError("dropout must lie in [0,1)");
  }
};

/// Full-scale preset (200x200 grid, E=256, 8 layers / 8 heads).
ModelConfig full_scale_config();

struct OptimizerConfig {
  double lr = 5e-5;
  double finetune_lr = 2e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t batch_size = 32;
  int epochs_per_stage = 20;
  int finetune_epochs = 10;
  bool shuffle_within_stage = false;
  std::uint64_t seed = 1;
};

inline ModelConfig full_scale_config() {
  ModelConfig cfg;
  cfg.grid = {200, 200, 500.0};
  cfg.embed_dim = 256;
  cfg.num_layers = 8;
  cfg.num_heads = 8;
  cfg.ffn_dim = 1024;
  return cfg;
}

}  // namespace mobcl
