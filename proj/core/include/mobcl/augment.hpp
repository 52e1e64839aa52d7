#pragma once

#include <string>

#include "mobcl/dataset.hpp"

namespace mobcl {

enum class AugmentOp { identity, mirror_h, mirror_v, rotate_180 };

constexpr AugmentOp kAllAugmentOps[] = {AugmentOp::identity,
                                        AugmentOp::mirror_h,
                                        AugmentOp::mirror_v,
                                        AugmentOp::rotate_180};

/// Variant tag appended to the uid ("" / "#h" / "#v" / "#r").
std::string variant_suffix(AugmentOp op);

/// Variant op encoded in the uid suffix.
AugmentOp variant_of_uid(const std::string& uid);

/// Group composition (each op is its own inverse).
AugmentOp compose(AugmentOp a, AugmentOp b);

/// True if the uid carries no augmentation suffix.
bool is_real_uid(const std::string& uid);

/// Strips any variant suffix.
std::string base_uid(const std::string& uid);

TrajectoryPoint augment_point(const TrajectoryPoint& p, AugmentOp op,
                              const GridSpec& grid);

/// Applies op to all points; timestamps unchanged; uid gets the variant tag.
Trajectory augment_trajectory(const Trajectory& traj, AugmentOp op,
                              const GridSpec& grid);

/// All four variants of every trajectory; exactly 4x the trajectory count.
Dataset augment_dataset(const Dataset& ds);

/// Moves each cell's category vector to the op-image cell.
PoiTable transform_poi(const PoiTable& poi, AugmentOp op,
                       const GridSpec& grid);

}  // namespace mobcl
