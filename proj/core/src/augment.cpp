#include "mobcl/augment.hpp"

namespace mobcl {

std::string variant_suffix(AugmentOp op) {
  switch (op) {
    case AugmentOp::identity:
      return "";
    case AugmentOp::mirror_h:
      return "#h";
    case AugmentOp::mirror_v:
      return "#v";
    case AugmentOp::rotate_180:
      return "#r";
  }
  return "";
}

AugmentOp variant_of_uid(const std::string& uid) {
  auto pos = uid.find('#');
  if (pos == std::string::npos) return AugmentOp::identity;
  std::string tag = uid.substr(pos);
  if (tag == "#h") return AugmentOp::mirror_h;
  if (tag == "#v") return AugmentOp::mirror_v;
  if (tag == "#r") return AugmentOp::rotate_180;
  throw DataError("unknown variant tag in uid " + uid);
}

namespace {
// (flip_x, flip_y) bit pair; composition is XOR
int flip_bits(AugmentOp op) {
  switch (op) {
    case AugmentOp::identity:
      return 0;
    case AugmentOp::mirror_h:
      return 1;
    case AugmentOp::mirror_v:
      return 2;
    case AugmentOp::rotate_180:
      return 3;
  }
  return 0;
}
AugmentOp from_bits(int bits) {
  switch (bits) {
    case 1:
      return AugmentOp::mirror_h;
    case 2:
      return AugmentOp::mirror_v;
    case 3:
      return AugmentOp::rotate_180;
    default:
      return AugmentOp::identity;
  }
}
}  // namespace

AugmentOp compose(AugmentOp a, AugmentOp b) {
  return from_bits(flip_bits(a) ^ flip_bits(b));
}

bool is_real_uid(const std::string& uid) {
  return uid.find('#') == std::string::npos;
}

std::string base_uid(const std::string& uid) {
  auto pos = uid.find('#');
  return pos == std::string::npos ? uid : uid.substr(0, pos);
}

TrajectoryPoint augment_point(const TrajectoryPoint& p, AugmentOp op,
                              const GridSpec& grid) {
  TrajectoryPoint q = p;
  switch (op) {
    case AugmentOp::identity:
      break;
    case AugmentOp::mirror_h:
      q.x = grid.x_max() - p.x;
      break;
    case AugmentOp::mirror_v:
      q.y = grid.y_max() - p.y;
      break;
    case AugmentOp::rotate_180:
      q.x = grid.x_max() - p.x;
      q.y = grid.y_max() - p.y;
      break;
  }
  return q;
}

Trajectory augment_trajectory(const Trajectory& traj, AugmentOp op,
                              const GridSpec& grid) {
  Trajectory out;
  out.uid =
      base_uid(traj.uid) + variant_suffix(compose(variant_of_uid(traj.uid), op));
  out.points.reserve(traj.points.size());
  for (const auto& p : traj.points)
    out.points.push_back(augment_point(p, op, grid));
  return out;
}

Dataset augment_dataset(const Dataset& ds) {
  Dataset out;
  out.grid = ds.grid;
  out.time = ds.time;
  out.poi = ds.poi;
  for (const auto& [uid, traj] : ds.trajectories)
    for (AugmentOp op : kAllAugmentOps) {
      Trajectory v = augment_trajectory(traj, op, ds.grid);
      out.trajectories[v.uid] = std::move(v);
    }
  return out;
}

PoiTable transform_poi(const PoiTable& poi, AugmentOp op,
                       const GridSpec& grid) {
  PoiTable out;
  out.num_categories = poi.num_categories;
  for (const auto& [key, counts] : poi.cells) {
    TrajectoryPoint p;
    p.x = key / grid.height;
    p.y = key % grid.height;
    TrajectoryPoint q = augment_point(p, op, grid);
    out.cells[PoiTable::cell_key(q.x, q.y, grid)] = counts;
  }
  return out;
}

}  // namespace mobcl
