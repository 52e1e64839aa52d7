#include "mobcl/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

namespace mobcl {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

long parse_int(const std::string& s, std::size_t line_no, const char* what) {
  long v = 0;
  const char* begin = s.data();
  const char* end = begin + s.size();
  // tolerate surrounding spaces and a trailing \r from CRLF files
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin &&
         (end[-1] == ' ' || end[-1] == '\t' || end[-1] == '\r'))
    --end;
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc{} || ptr != end)
    throw DataError("line " + std::to_string(line_no) + ": malformed " +
                    what + " value '" + s + "'");
  return v;
}

std::string strip_cr(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  return s;
}

}  // namespace

Dataset ingest_trajectories(std::istream& in, const GridSpec& grid,
                            const TimeSpec& time) {
  grid.check();
  time.check();

  Dataset ds;
  ds.grid = grid;
  ds.time = time;

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line))
    throw DataError("empty trajectory stream");
  ++line_no;
  if (strip_cr(line) != "uid,d,t,x,y")
    throw DataError("line 1: expected header uid,d,t,x,y");

  std::map<std::string, std::set<std::pair<int, int>>> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (strip_cr(line).empty()) continue;
    auto fields = split_line(line);
    if (fields.size() != 5)
      throw DataError("line " + std::to_string(line_no) +
                      ": expected 5 fields, got " +
                      std::to_string(fields.size()));
    std::string uid = strip_cr(fields[0]);
    if (uid.empty())
      throw DataError("line " + std::to_string(line_no) + ": empty uid");
    TrajectoryPoint p;
    p.dId = static_cast<int>(parse_int(fields[1], line_no, "d"));
    p.tId = static_cast<int>(parse_int(fields[2], line_no, "t"));
    p.x = static_cast<int>(parse_int(fields[3], line_no, "x"));
    p.y = static_cast<int>(parse_int(fields[4], line_no, "y"));
    if (p.dId < 0 || p.dId >= time.num_days || p.tId < 0 ||
        p.tId >= time.slots_per_day)
      throw DataError("line " + std::to_string(line_no) +
                      ": time index out of bounds");
    if (p.x < 0 || p.x > grid.x_max() || p.y < 0 || p.y > grid.y_max())
      throw DataError("line " + std::to_string(line_no) +
                      ": coordinate out of bounds");
    if (!seen[uid].insert({p.dId, p.tId}).second)
      throw DataError("line " + std::to_string(line_no) +
                      ": duplicate timestamp (d=" + std::to_string(p.dId) +
                      ",t=" + std::to_string(p.tId) + ") for uid " + uid);
    auto& traj = ds.trajectories[uid];
    traj.uid = uid;
    traj.points.push_back(p);
  }

  for (auto& [uid, traj] : ds.trajectories) {
    std::sort(traj.points.begin(), traj.points.end(),
              [](const TrajectoryPoint& a, const TrajectoryPoint& b) {
                return std::pair{a.dId, a.tId} < std::pair{b.dId, b.tId};
              });
  }
  return ds;
}

PoiTable ingest_poi(std::istream& in, const GridSpec& grid,
                    int num_categories) {
  PoiTable poi;
  poi.num_categories = num_categories;

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw DataError("empty POI stream");
  ++line_no;
  if (strip_cr(line) != "x,y,cat,count")
    throw DataError("line 1: expected header x,y,cat,count");

  while (std::getline(in, line)) {
    ++line_no;
    if (strip_cr(line).empty()) continue;
    auto fields = split_line(line);
    if (fields.size() != 4)
      throw DataError("line " + std::to_string(line_no) +
                      ": expected 4 fields");
    int x = static_cast<int>(parse_int(fields[0], line_no, "x"));
    int y = static_cast<int>(parse_int(fields[1], line_no, "y"));
    int cat = static_cast<int>(parse_int(fields[2], line_no, "cat"));
    int count = static_cast<int>(parse_int(fields[3], line_no, "count"));
    if (x < 0 || x > grid.x_max() || y < 0 || y > grid.y_max())
      throw DataError("line " + std::to_string(line_no) +
                      ": POI cell out of bounds");
    if (cat < 0 || cat >= num_categories)
      throw DataError("line " + std::to_string(line_no) +
                      ": POI category out of range");
    if (count < 0)
      throw DataError("line " + std::to_string(line_no) +
                      ": negative POI count");
    auto& vec = poi.cells[PoiTable::cell_key(x, y, grid)];
    if (vec.empty()) vec.assign(num_categories, 0);
    vec[cat] += count;
  }
  return poi;
}

void write_trajectories_csv(const Dataset& ds, std::ostream& out) {
  out << "uid,d,t,x,y\n";
  for (const auto& [uid, traj] : ds.trajectories)
    for (const auto& p : traj.points)
      out << uid << ',' << p.dId << ',' << p.tId << ',' << p.x << ',' << p.y
          << '\n';
}

void write_poi_csv(const PoiTable& poi, const GridSpec& grid,
                   std::ostream& out) {
  out << "x,y,cat,count\n";
  for (const auto& [key, counts] : poi.cells) {
    int x = key / grid.height;
    int y = key % grid.height;
    for (int cat = 0; cat < static_cast<int>(counts.size()); ++cat)
      if (counts[cat] > 0)
        out << x << ',' << y << ',' << cat << ',' << counts[cat] << '\n';
  }
}

SplitResult split_by_user(const Dataset& ds, double train_ratio,
                          double val_ratio, double test_ratio,
                          std::uint64_t seed) {
  if (train_ratio < 0 || val_ratio < 0 || test_ratio < 0 ||
      train_ratio + val_ratio + test_ratio <= 0)
    throw DataError("split ratios must be non-negative with positive sum");
  if (ds.trajectories.empty()) throw DataError("cannot split empty dataset");

  std::vector<std::string> uids;
  uids.reserve(ds.num_users());
  for (const auto& [uid, _] : ds.trajectories) uids.push_back(uid);

  std::mt19937_64 rng(seed);
  std::shuffle(uids.begin(), uids.end(), rng);

  const double total = train_ratio + val_ratio + test_ratio;
  const auto n = uids.size();
  auto n_val = static_cast<std::size_t>(
      static_cast<double>(n) * (val_ratio / total));
  auto n_test = static_cast<std::size_t>(
      static_cast<double>(n) * (test_ratio / total));
  if (n_val + n_test > n)
    throw DataError("fewer users than split partitions require");
  auto n_train = n - n_val - n_test;  // remainder goes to train

  if ((val_ratio > 0 && n_val == 0) || (test_ratio > 0 && n_test == 0) ||
      (train_ratio > 0 && n_train == 0))
    throw DataError("fewer users than partitions needing at least one user");

  SplitResult result;
  for (Dataset* part : {&result.train, &result.val, &result.test}) {
    part->grid = ds.grid;
    part->time = ds.time;
    part->poi = ds.poi;
  }
  for (std::size_t i = 0; i < n; ++i) {
    Dataset* target = i < n_train          ? &result.train
                      : i < n_train + n_val ? &result.val
                                            : &result.test;
    target->trajectories[uids[i]] = ds.trajectories.at(uids[i]);
  }
  result.empty_partition_warning =
      result.val.trajectories.empty() || result.test.trajectories.empty();
  return result;
}

ValidationReport validate(const Dataset& ds) {
  ValidationReport report;
  const double grid_slots =
      static_cast<double>(ds.time.num_days) * ds.time.slots_per_day;
  for (const auto& [uid, traj] : ds.trajectories) {
    UserStats stats;
    stats.uid = uid;
    stats.num_points = traj.points.size();
    stats.sparsity = static_cast<double>(traj.points.size()) / grid_slots;
    for (const auto& p : traj.points) {
      bool ok = p.dId >= 0 && p.dId < ds.time.num_days && p.tId >= 0 &&
                p.tId < ds.time.slots_per_day && p.x >= 0 &&
                p.x <= ds.grid.x_max() && p.y >= 0 && p.y <= ds.grid.y_max();
      if (!ok) ++stats.bound_violations;
    }
    report.total_points += stats.num_points;
    report.total_violations += stats.bound_violations;
    report.users.push_back(std::move(stats));
  }
  return report;
}

void write_validation_report(const ValidationReport& report,
                             std::ostream& out) {
  out << "users=" << report.users.size() << '\n';
  out << "total_points=" << report.total_points << '\n';
  out << "total_violations=" << report.total_violations << '\n';
  for (const auto& u : report.users)
    out << "user " << u.uid << " points=" << u.num_points
        << " sparsity=" << u.sparsity << " violations=" << u.bound_violations
        << '\n';
}

}  // namespace mobcl
