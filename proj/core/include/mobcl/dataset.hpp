#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mobcl {

/// Raised on malformed or out-of-contract input data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GridSpec {
  int width = 200;
  int height = 200;
  double cell_size_m = 500.0;

  int x_max() const { return width - 1; }
  int y_max() const { return height - 1; }
  int num_cells() const { return width * height; }

  void check() const {
    if (width < 1 || height < 1 || cell_size_m <= 0.0)
      throw DataError("invalid GridSpec");
  }
};

struct TimeSpec {
  int slots_per_day = 48;
  int num_days = 75;

  void check() const {
    if (slots_per_day < 1 || num_days < 1)
      throw DataError("invalid TimeSpec");
  }
};

struct TrajectoryPoint {
  int dId = 0;
  int tId = 0;
  int x = 0;
  int y = 0;

  bool operator==(const TrajectoryPoint&) const = default;
};

struct Trajectory {
  std::string uid;
  std::vector<TrajectoryPoint> points;  // strictly increasing in (dId,tId)

  bool operator==(const Trajectory&) const = default;
};

/// Per-cell POI category counts. Cells without an entry are all-zero.
struct PoiTable {
  int num_categories = 85;
  // keyed by cell id x*height + y
  std::map<int, std::vector<int>> cells;

  static int cell_key(int x, int y, const GridSpec& grid) {
    return x * grid.height + y;
  }
  const std::vector<int>* find(int x, int y, const GridSpec& grid) const {
    auto it = cells.find(cell_key(x, y, grid));
    return it == cells.end() ? nullptr : &it->second;
  }
};

struct Dataset {
  GridSpec grid;
  TimeSpec time;
  std::map<std::string, Trajectory> trajectories;  // keyed by uid, sorted
  std::optional<PoiTable> poi;

  std::size_t num_users() const { return trajectories.size(); }
};

struct UserStats {
  std::string uid;
  std::size_t num_points = 0;
  double sparsity = 0.0;  // fraction of the day-slot grid populated
  std::size_t bound_violations = 0;
};

struct ValidationReport {
  std::vector<UserStats> users;
  std::size_t total_points = 0;
  std::size_t total_violations = 0;

  bool ok() const { return total_violations == 0; }
};

/// Parses trajectory CSV (header uid,d,t,x,y) into a validated Dataset.
/// Rows may arrive in any order; per-user points come out sorted by (dId,tId).
Dataset ingest_trajectories(std::istream& in, const GridSpec& grid,
                            const TimeSpec& time);

/// Parses POI CSV (header x,y,cat,count).
PoiTable ingest_poi(std::istream& in, const GridSpec& grid,
                    int num_categories = 85);

void write_trajectories_csv(const Dataset& ds, std::ostream& out);
void write_poi_csv(const PoiTable& poi, const GridSpec& grid,
                   std::ostream& out);

struct SplitResult {
  Dataset train;
  Dataset val;
  Dataset test;
  bool empty_partition_warning = false;
};

/// Partitions users into train/val/test by seeded uid shuffle. Partition
/// sizes are floor-allocated from the normalized ratios; remainder users go
/// to train.
SplitResult split_by_user(const Dataset& ds, double train_ratio,
                          double val_ratio, double test_ratio,
                          std::uint64_t seed);

ValidationReport validate(const Dataset& ds);
void write_validation_report(const ValidationReport& report, std::ostream& out);

}  // namespace mobcl
