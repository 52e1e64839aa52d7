#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "mobcl/dataset.hpp"

namespace mobcl {

struct StageSpec {
  double entropy_upper = std::numeric_limits<double>::infinity();
  int horizon_days = 15;  // Pho
  int epochs = 20;
};

/// Stage table with thresholds 0.4 / 0.65 and horizons 3 / 7 / 15 days.
std::vector<StageSpec> default_stages(int epochs_per_stage = 20);

struct ScheduleEntry {
  std::string uid;  // tagged variant uid
  double h_norm = 0.0;
  int stage = 0;  // 0-based
  int horizon_days = 0;
};

struct CurriculumSchedule {
  std::vector<ScheduleEntry> entries;  // sorted by (stage, h_norm, uid)
  std::vector<StageSpec> stages;
  bool had_empty_stage = false;
};

/// Smallest stage index whose entropy_upper exceeds h_norm; last stage
/// admits everything.
int stage_of(double h_norm, const std::vector<StageSpec>& stages);

/// Cumulative admission: stage s contains every trajectory whose entropy is
/// below the stage threshold, so later stages re-include earlier data.
/// disjoint=true restricts each stage to its own entropy band instead.
CurriculumSchedule build_curriculum(const Dataset& aug_dataset,
                                    const std::vector<StageSpec>& stages,
                                    bool disjoint = false);

/// Batches in schedule order; batches never straddle stage boundaries.
/// With shuffle=true, entries are shuffled within each stage by the seed.
std::vector<std::vector<ScheduleEntry>> schedule_batches(
    const CurriculumSchedule& schedule, std::size_t batch_size,
    bool shuffle = false, std::uint64_t seed = 0);

/// Keeps only identity-variant trajectories (finetune input).
Dataset finetune_selector(const Dataset& ds);

void write_schedule_csv(const CurriculumSchedule& schedule, std::ostream& out);
CurriculumSchedule read_schedule_csv(std::istream& in);

}  // namespace mobcl
