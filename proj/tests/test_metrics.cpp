#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "mobcl/augment.hpp"
#include "mobcl/metrics.hpp"

using namespace mobcl;

namespace {

using Points = std::vector<TrajectoryPoint>;

double euclid(const TrajectoryPoint& a, const TrajectoryPoint& b) {
  double dx = a.x - b.x, dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

// Exhaustive minimum over monotone boundary-aligned alignments.
double brute_dtw(const Points& a, const Points& b, std::size_t i,
                 std::size_t j) {
  double cost = euclid(a[i], b[j]);
  if (i == 0 && j == 0) return cost;
  double best = std::numeric_limits<double>::infinity();
  if (i > 0) best = std::min(best, brute_dtw(a, b, i - 1, j));
  if (j > 0) best = std::min(best, brute_dtw(a, b, i, j - 1));
  if (i > 0 && j > 0) best = std::min(best, brute_dtw(a, b, i - 1, j - 1));
  return cost + best;
}

Points random_points(std::mt19937_64& rng, std::size_t n, int extent = 10) {
  Points p;
  for (std::size_t i = 0; i < n; ++i)
    p.push_back({0, static_cast<int>(i), static_cast<int>(rng()) % extent,
                 static_cast<int>(rng()) % extent});
  return p;
}

}  // namespace

TEST_CASE("dtw basics") {
  Points a = {{0, 0, 0, 0}};
  Points b = {{0, 0, 3, 4}};
  CHECK(dtw_distance(a, b) == doctest::Approx(5.0));
  Points c = {{0, 0, 0, 0}, {0, 1, 1, 0}};
  Points d = {{0, 0, 0, 0}, {0, 1, 0, 0}, {0, 2, 1, 0}};
  CHECK(dtw_distance(c, d) == doctest::Approx(0.0));
  CHECK_THROWS_AS(dtw_distance({}, a), DataError);
}

TEST_CASE("dtw matches brute-force enumeration on short pairs") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 500; ++trial) {
    Points a = random_points(rng, 1 + rng() % 6);
    Points b = random_points(rng, 1 + rng() % 6);
    double fast = dtw_distance(a, b);
    double slow = brute_dtw(a, b, a.size() - 1, b.size() - 1);
    CHECK(fast == doctest::Approx(slow).epsilon(1e-12));
  }
}

TEST_CASE("dtw self distance is zero and non-negative in general") {
  std::mt19937_64 rng(78);
  for (int trial = 0; trial < 100; ++trial) {
    Points a = random_points(rng, 1 + rng() % 20);
    CHECK(dtw_distance(a, a) == 0.0);
    Points b = random_points(rng, 1 + rng() % 20);
    CHECK(dtw_distance(a, b) >= 0.0);
  }
}

TEST_CASE("geo_bleu identity and single-point decay") {
  std::mt19937_64 rng(79);
  Points a = random_points(rng, 10);
  GeoBleuParams params;
  CHECK(geo_bleu(a, a, params) == doctest::Approx(1.0).epsilon(1e-12));

  Points p = {{0, 0, 0, 0}};
  Points t = {{0, 0, 3, 4}};
  GeoBleuParams uni;
  uni.max_n = 1;
  CHECK(geo_bleu(p, t, uni) ==
        doctest::Approx(std::exp(-0.5 * 5.0)).epsilon(1e-12));
}

TEST_CASE("geo_bleu decays to zero for distant predictions") {
  Points t = {{0, 0, 0, 0}, {0, 1, 1, 1}, {0, 2, 2, 2}};
  Points p = {{0, 0, 150, 150}, {0, 1, 151, 151}, {0, 2, 152, 152}};
  CHECK(geo_bleu(p, t) < 1e-10);
}

TEST_CASE("geo_bleu monotone under growing uniform displacement") {
  std::mt19937_64 rng(80);
  Points truth = random_points(rng, 8, 20);
  double prev = 1.1;
  for (int step = 0; step <= 10; ++step) {
    Points pred = truth;
    for (auto& pt : pred) {
      pt.x += step;
      pt.y += step;
    }
    double score = geo_bleu(pred, truth);
    CHECK(score <= prev + 1e-12);
    prev = score;
  }
}

TEST_CASE("geo_bleu handles sequences shorter than max_n") {
  Points p = {{0, 0, 1, 1}, {0, 1, 2, 2}};
  Points t = {{0, 0, 1, 1}, {0, 1, 2, 2}};
  GeoBleuParams params;  // max_n = 3 but only 2 points
  CHECK(geo_bleu(p, t, params) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("greedy matching agrees with optimal assignment on tiny inputs") {
  std::mt19937_64 rng(81);
  for (int trial = 0; trial < 30; ++trial) {
    Points p = random_points(rng, 2 + rng() % 3, 4);
    Points t = random_points(rng, 2 + rng() % 3, 4);
    GeoBleuParams greedy;
    greedy.max_n = 2;
    GeoBleuParams optimal = greedy;
    optimal.optimal_matching = true;
    // greedy is a lower bound on the optimal assignment
    CHECK(geo_bleu(p, t, greedy) <= geo_bleu(p, t, optimal) + 1e-12);
  }
}

TEST_CASE("metrics invariant under simultaneous augmentation") {
  std::mt19937_64 rng(82);
  GridSpec grid{200, 200, 500.0};
  Points pred = random_points(rng, 8, 50);
  Points truth = random_points(rng, 8, 50);
  double dtw0 = dtw_distance(pred, truth);
  double geo0 = geo_bleu(pred, truth);
  for (AugmentOp op : kAllAugmentOps) {
    Points pa, ta;
    for (const auto& pt : pred) pa.push_back(augment_point(pt, op, grid));
    for (const auto& pt : truth) ta.push_back(augment_point(pt, op, grid));
    CHECK(dtw_distance(pa, ta) == doctest::Approx(dtw0).epsilon(1e-12));
    CHECK(geo_bleu(pa, ta) == doctest::Approx(geo0).epsilon(1e-12));
  }
}

TEST_CASE("evaluate aggregates and validates user sets") {
  std::map<std::string, Points> preds, truths;
  preds["a"] = {{0, 0, 1, 1}};
  truths["a"] = {{0, 0, 1, 1}};
  preds["b"] = {{0, 0, 0, 0}};
  truths["b"] = {{0, 0, 3, 4}};
  GeoBleuParams params;
  params.max_n = 1;
  auto report = evaluate(preds, truths, params);
  CHECK(report.per_user.at("a").geobleu == doctest::Approx(1.0));
  CHECK(report.per_user.at("a").dtw == doctest::Approx(0.0));
  CHECK(report.mean_dtw == doctest::Approx(2.5));
  CHECK(report.mean_geobleu ==
        doctest::Approx(0.5 * (1.0 + std::exp(-0.5 * 5.0))));

  preds.erase("b");
  CHECK_THROWS_WITH_AS(evaluate(preds, truths, params),
                       doctest::Contains("b"), DataError);

  std::ostringstream json;
  write_metrics_json(report, json);
  CHECK(json.str().find("mean_geobleu") != std::string::npos);
}
