#include "mobcl/model/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include "mobcl/augment.hpp"

namespace mobcl {

void write_history_csv(const TrainHistory& history, std::ostream& out) {
  out << "epoch,stage,train_loss,val_loss,loc_loss,dist_loss,dir_loss,seconds\n";
  char buf[256];
  for (const auto& r : history.epochs) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.12g,%.12g,%.12g,%.12g,%.12g,%.3f\n",
                  r.epoch, r.stage, r.train_loss, r.val_loss, r.loc_loss,
                  r.dist_loss, r.dir_loss, r.seconds);
    out << buf;
  }
}

AdamOptimizer::AdamOptimizer(ParamStore& params, const OptimizerConfig& cfg)
    : params_(params), cfg_(cfg), lr_(cfg.lr) {
  for (const auto& name : params.names()) {
    const Tensor& t = params.at(name);
    moments_[name] = {Matrix::Zero(t.value.rows(), t.value.cols()),
                      Matrix::Zero(t.value.rows(), t.value.cols())};
  }
}

void AdamOptimizer::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (const auto& name : params_.names()) {
    Tensor& t = params_.at(name);
    auto& [m, v] = moments_.at(name);
    m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * t.grad;
    v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * t.grad.cwiseProduct(t.grad);
    Matrix m_hat = m / bc1;
    Matrix v_hat = v / bc2;
    t.value.array() -=
        lr_ * m_hat.array() / (v_hat.array().sqrt() + cfg_.eps);
  }
}

SampleStore::SampleStore(const Dataset& dataset, const FeatureConfig& fcfg,
                         int observe_days)
    : dataset_(dataset), fcfg_(fcfg), observe_days_(observe_days) {}

const ModelSample& SampleStore::get(const std::string& uid,
                                    int horizon_days) const {
  const ModelSample* s = try_get(uid, horizon_days);
  if (!s)
    throw DataError("no usable sample for uid " + uid + " at horizon " +
                    std::to_string(horizon_days));
  return *s;
}

const ModelSample* SampleStore::try_get(const std::string& uid,
                                        int horizon_days) const {
  auto key = std::make_pair(uid, horizon_days);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second.uid.empty() ? nullptr : &it->second;
  auto traj_it = dataset_.trajectories.find(uid);
  if (traj_it == dataset_.trajectories.end()) return nullptr;
  const PoiTable* poi = dataset_.poi ? &*dataset_.poi : nullptr;
  try {
    ModelSample sample =
        build_model_sample(traj_it->second, poi, fcfg_, observe_days_,
                           horizon_days, dataset_.grid, dataset_.time);
    auto [ins, _] = cache_.emplace(key, std::move(sample));
    return &ins->second;
  } catch (const DataError&) {
    cache_.emplace(key, ModelSample{});  // negative cache
    return nullptr;
  }
}

namespace {

struct EpochStats {
  double total = 0.0, loc = 0.0, dist = 0.0, dir = 0.0;
  std::size_t samples = 0;
  void add(const TaskLosses& l, std::size_t n) {
    total += l.total * static_cast<double>(n);
    loc += l.loc * static_cast<double>(n);
    dist += l.dist * static_cast<double>(n);
    dir += l.dir * static_cast<double>(n);
    samples += n;
  }
};

double validation_loss(const Network& model, const SampleStore* val,
                       int horizon_days, std::size_t batch_size) {
  if (!val) return std::numeric_limits<double>::quiet_NaN();
  std::vector<const ModelSample*> batch;
  EpochStats stats;
  auto flush = [&]() {
    if (batch.empty()) return;
    stats.add(model.loss(batch), batch.size());
    batch.clear();
  };
  for (const auto& [uid, _] : val->dataset().trajectories) {
    const ModelSample* s = val->try_get(uid, horizon_days);
    if (!s) continue;
    batch.push_back(s);
    if (batch.size() == batch_size) flush();
  }
  flush();
  return stats.samples == 0 ? std::numeric_limits<double>::quiet_NaN()
                            : stats.total / static_cast<double>(stats.samples);
}

// One optimization epoch over the given entries, batched without crossing
// the caller's grouping.
EpochStats run_epoch(Network& model, AdamOptimizer& adam,
                     const SampleStore& samples,
                     const std::vector<ScheduleEntry>& entries,
                     const OptimizerConfig& ocfg,
                     std::mt19937_64* dropout_rng) {
  EpochStats stats;
  std::vector<const ModelSample*> batch;
  auto flush = [&]() {
    if (batch.empty()) return;
    model.params().zero_grads();
    TaskLosses l = model.forward_backward(batch, dropout_rng);
    adam.step();
    stats.add(l, batch.size());
    batch.clear();
  };
  for (const auto& entry : entries) {
    const ModelSample* s = samples.try_get(entry.uid, entry.horizon_days);
    if (!s) continue;
    batch.push_back(s);
    if (batch.size() == ocfg.batch_size) flush();
  }
  flush();
  return stats;
}

}  // namespace

TrainResult train(const CurriculumSchedule& schedule,
                  const SampleStore& train_samples,
                  const SampleStore* val_samples, const ModelConfig& mcfg,
                  const OptimizerConfig& ocfg) {
  TrainResult result;
  result.model = std::make_shared<Network>(mcfg);
  AdamOptimizer adam(result.model->params(), ocfg);
  adam.set_lr(ocfg.lr);

  std::mt19937_64 dropout_rng(ocfg.seed ^ 0xd00d);
  std::mt19937_64* drng = mcfg.dropout > 0.0 ? &dropout_rng : nullptr;

  // group contiguous schedule entries by stage
  std::vector<std::pair<int, std::vector<ScheduleEntry>>> stages;
  for (const auto& e : schedule.entries) {
    if (stages.empty() || stages.back().first != e.stage)
      stages.push_back({e.stage, {}});
    stages.back().second.push_back(e);
  }

  int final_horizon = schedule.entries.empty()
                          ? 15
                          : schedule.entries.back().horizon_days;
  int epoch_counter = 0;
  for (const auto& [stage, entries] : stages) {
    int stage_epochs =
        stage < static_cast<int>(schedule.stages.size())
            ? schedule.stages[static_cast<std::size_t>(stage)].epochs
            : ocfg.epochs_per_stage;
    for (int ep = 0; ep < stage_epochs; ++ep) {
      auto start = std::chrono::steady_clock::now();
      std::vector<ScheduleEntry> order = entries;
      if (ocfg.shuffle_within_stage) {
        std::mt19937_64 rng(ocfg.seed ^
                            (0x9e3779b97f4a7c15ull *
                             static_cast<std::uint64_t>(epoch_counter + 1)));
        std::shuffle(order.begin(), order.end(), rng);
      }
      EpochStats stats =
          run_epoch(*result.model, adam, train_samples, order, ocfg, drng);
      EpochRecord rec;
      rec.epoch = epoch_counter++;
      rec.stage = stage;
      if (stats.samples > 0) {
        rec.train_loss = stats.total / static_cast<double>(stats.samples);
        rec.loc_loss = stats.loc / static_cast<double>(stats.samples);
        rec.dist_loss = stats.dist / static_cast<double>(stats.samples);
        rec.dir_loss = stats.dir / static_cast<double>(stats.samples);
      }
      rec.val_loss = validation_loss(*result.model, val_samples,
                                     final_horizon, ocfg.batch_size);
      rec.seconds = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - start)
                        .count();
      result.history.epochs.push_back(rec);
    }
  }
  return result;
}

TrainHistory finetune(Network& model, const SampleStore& real_samples,
                      const SampleStore* val_samples,
                      const OptimizerConfig& ocfg, int horizon_days) {
  for (const auto& [uid, _] : real_samples.dataset().trajectories)
    if (!is_real_uid(uid))
      throw DataError("finetune: dataset contains augmented variant " + uid);

  AdamOptimizer adam(model.params(), ocfg);
  adam.set_lr(ocfg.finetune_lr);
  std::mt19937_64 dropout_rng(ocfg.seed ^ 0xf17e);
  std::mt19937_64* drng = model.config().dropout > 0.0 ? &dropout_rng : nullptr;

  std::vector<ScheduleEntry> entries;
  for (const auto& [uid, _] : real_samples.dataset().trajectories)
    entries.push_back({uid, 0.0, -1, horizon_days});

  TrainHistory history;
  for (int ep = 0; ep < ocfg.finetune_epochs; ++ep) {
    auto start = std::chrono::steady_clock::now();
    std::vector<ScheduleEntry> order = entries;
    if (ocfg.shuffle_within_stage) {
      std::mt19937_64 rng(ocfg.seed ^
                          (0xc2b2ae3d27d4eb4full *
                           static_cast<std::uint64_t>(ep + 1)));
      std::shuffle(order.begin(), order.end(), rng);
    }
    EpochStats stats =
        run_epoch(model, adam, real_samples, order, ocfg, drng);
    EpochRecord rec;
    rec.epoch = ep;
    rec.stage = -1;
    if (stats.samples > 0) {
      rec.train_loss = stats.total / static_cast<double>(stats.samples);
      rec.loc_loss = stats.loc / static_cast<double>(stats.samples);
      rec.dist_loss = stats.dist / static_cast<double>(stats.samples);
      rec.dir_loss = stats.dir / static_cast<double>(stats.samples);
    }
    rec.val_loss =
        validation_loss(model, val_samples, horizon_days, ocfg.batch_size);
    rec.seconds = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - start)
                      .count();
    history.epochs.push_back(rec);
  }
  return history;
}

}  // namespace mobcl
