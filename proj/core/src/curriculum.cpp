#include "mobcl/curriculum.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <tuple>

#include "mobcl/augment.hpp"
#include "mobcl/entropy.hpp"

namespace mobcl {

std::vector<StageSpec> default_stages(int epochs_per_stage) {
  return {
      {0.4, 3, epochs_per_stage},
      {0.65, 7, epochs_per_stage},
      {std::numeric_limits<double>::infinity(), 15, epochs_per_stage},
  };
}

int stage_of(double h_norm, const std::vector<StageSpec>& stages) {
  if (stages.empty()) throw DataError("stage_of: no stages");
  for (std::size_t s = 0; s + 1 < stages.size(); ++s)
    if (h_norm < stages[s].entropy_upper) return static_cast<int>(s);
  return static_cast<int>(stages.size()) - 1;
}

CurriculumSchedule build_curriculum(const Dataset& aug_dataset,
                                    const std::vector<StageSpec>& stages,
                                    bool disjoint) {
  if (stages.empty()) throw DataError("build_curriculum: no stages");
  for (std::size_t s = 1; s < stages.size(); ++s) {
    if (!(stages[s].entropy_upper > stages[s - 1].entropy_upper))
      throw DataError("stage thresholds must be strictly increasing");
    if (stages[s].horizon_days < stages[s - 1].horizon_days)
      throw DataError("stage horizons must be non-decreasing");
  }

  struct Scored {
    std::string uid;
    double h_norm;
  };
  std::vector<Scored> scored;
  scored.reserve(aug_dataset.num_users());
  for (const auto& [uid, traj] : aug_dataset.trajectories)
    scored.push_back({uid, trajectory_entropy(traj, aug_dataset.grid)});

  CurriculumSchedule schedule;
  schedule.stages = stages;
  for (std::size_t s = 0; s < stages.size(); ++s) {
    std::vector<ScheduleEntry> stage_entries;
    for (const auto& item : scored) {
      int admit = stage_of(item.h_norm, stages);
      bool in_stage = disjoint ? admit == static_cast<int>(s)
                               : admit <= static_cast<int>(s);
      if (in_stage)
        stage_entries.push_back({item.uid, item.h_norm, static_cast<int>(s),
                                 stages[s].horizon_days});
    }
    if (stage_entries.empty()) {
      schedule.had_empty_stage = true;
      continue;
    }
    std::sort(stage_entries.begin(), stage_entries.end(),
              [](const ScheduleEntry& a, const ScheduleEntry& b) {
                return std::tie(a.h_norm, a.uid) < std::tie(b.h_norm, b.uid);
              });
    schedule.entries.insert(schedule.entries.end(), stage_entries.begin(),
                            stage_entries.end());
  }
  return schedule;
}

std::vector<std::vector<ScheduleEntry>> schedule_batches(
    const CurriculumSchedule& schedule, std::size_t batch_size, bool shuffle,
    std::uint64_t seed) {
  if (batch_size < 1) throw DataError("batch_size must be >= 1");
  std::vector<std::vector<ScheduleEntry>> batches;
  std::size_t i = 0;
  const auto& entries = schedule.entries;
  while (i < entries.size()) {
    // collect the current stage
    std::size_t j = i;
    while (j < entries.size() && entries[j].stage == entries[i].stage) ++j;
    std::vector<ScheduleEntry> stage(entries.begin() + i, entries.begin() + j);
    if (shuffle) {
      std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ull *
                                  (static_cast<std::uint64_t>(entries[i].stage) + 1)));
      std::shuffle(stage.begin(), stage.end(), rng);
    }
    for (std::size_t k = 0; k < stage.size(); k += batch_size) {
      auto end = std::min(k + batch_size, stage.size());
      batches.emplace_back(stage.begin() + k, stage.begin() + end);
    }
    i = j;
  }
  return batches;
}

Dataset finetune_selector(const Dataset& ds) {
  Dataset out;
  out.grid = ds.grid;
  out.time = ds.time;
  out.poi = ds.poi;
  for (const auto& [uid, traj] : ds.trajectories)
    if (is_real_uid(uid)) out.trajectories[uid] = traj;
  return out;
}

void write_schedule_csv(const CurriculumSchedule& schedule,
                        std::ostream& out) {
  out << "order,uid,variant,stage,horizon_days,h_norm\n";
  char buf[64];
  for (std::size_t i = 0; i < schedule.entries.size(); ++i) {
    const auto& e = schedule.entries[i];
    std::string variant = variant_suffix(variant_of_uid(e.uid));
    if (variant.empty())
      variant = "id";
    else
      variant = variant.substr(1);
    std::snprintf(buf, sizeof buf, "%.12g", e.h_norm);
    out << i << ',' << base_uid(e.uid) << ',' << variant << ','
        << e.stage + 1 << ',' << e.horizon_days << ',' << buf << '\n';
  }
}

CurriculumSchedule read_schedule_csv(std::istream& in) {
  CurriculumSchedule schedule;
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty schedule stream");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string order, uid, variant, stage, horizon, h_norm;
    if (!std::getline(ss, order, ',') || !std::getline(ss, uid, ',') ||
        !std::getline(ss, variant, ',') || !std::getline(ss, stage, ',') ||
        !std::getline(ss, horizon, ',') || !std::getline(ss, h_norm))
      throw DataError("malformed schedule row: " + line);
    ScheduleEntry e;
    e.uid = uid + (variant == "id" ? "" : "#" + variant);
    e.stage = std::stoi(stage) - 1;
    e.horizon_days = std::stoi(horizon);
    e.h_norm = std::stod(h_norm);
    schedule.entries.push_back(std::move(e));
  }
  return schedule;
}

}  // namespace mobcl
