#pragma once

#include <iosfwd>
#include <map>
#include <memory>

#include "mobcl/curriculum.hpp"
#include "mobcl/model/net.hpp"

namespace mobcl {

struct EpochRecord {
  int epoch = 0;
  int stage = -1;  // -1 for finetune epochs
  double train_loss = 0.0;
  double val_loss = 0.0;
  double loc_loss = 0.0;
  double dist_loss = 0.0;
  double dir_loss = 0.0;
  double seconds = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
};

void write_history_csv(const TrainHistory& history, std::ostream& out);

/// Adam with bias correction over a ParamStore.
class AdamOptimizer {
 public:
  AdamOptimizer(ParamStore& params, const OptimizerConfig& cfg);
  void set_lr(double lr) { lr_ = lr; }
  void step();

 private:
  ParamStore& params_;
  OptimizerConfig cfg_;
  double lr_;
  std::size_t t_ = 0;
  std::map<std::string, std::pair<Matrix, Matrix>> moments_;
};

/// Pre-built samples keyed by tagged uid; the horizon is baked into the
/// sample at construction time (one sample per (uid, horizon) pair).
class SampleStore {
 public:
  SampleStore(const Dataset& dataset, const FeatureConfig& fcfg,
              int observe_days);

  /// Sample for a schedule entry; built lazily and cached.
  const ModelSample& get(const std::string& uid, int horizon_days) const;

  /// nullptr when the uid's observation or target window is empty.
  const ModelSample* try_get(const std::string& uid, int horizon_days) const;
  int observe_days() const { return observe_days_; }
  const Dataset& dataset() const { return dataset_; }

 private:
  Dataset dataset_;
  FeatureConfig fcfg_;
  int observe_days_;
  mutable std::map<std::pair<std::string, int>, ModelSample> cache_;
};

struct TrainResult {
  std::shared_ptr<Network> model;
  TrainHistory history;
};

/// Curriculum pretraining: runs each stage for its epoch budget in schedule
/// order with Adam. Validation samples (if any) use the final-stage horizon.
TrainResult train(const CurriculumSchedule& schedule,
                  const SampleStore& train_samples,
                  const SampleStore* val_samples, const ModelConfig& mcfg,
                  const OptimizerConfig& ocfg);

/// Continues optimization on real (identity-variant) trajectories at the
/// reduced finetune learning rate and full horizon. Throws if the dataset
/// still contains augmented variants.
TrainHistory finetune(Network& model, const SampleStore& real_samples,
                      const SampleStore* val_samples,
                      const OptimizerConfig& ocfg, int horizon_days = 15);

}  // namespace mobcl
