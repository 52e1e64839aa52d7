#include "mobcl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "json.hpp"

namespace mobcl {

namespace {

double point_dist(const TrajectoryPoint& a, const TrajectoryPoint& b) {
  double dx = a.x - b.x;
  double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

double dtw_distance(const std::vector<TrajectoryPoint>& pred,
                    const std::vector<TrajectoryPoint>& truth) {
  if (pred.empty() || truth.empty())
    throw DataError("dtw_distance: empty sequence");
  const std::size_t n = pred.size();
  const std::size_t m = truth.size();
  std::vector<double> prev(m), cur(m);

  prev[0] = point_dist(pred[0], truth[0]);
  for (std::size_t j = 1; j < m; ++j)
    prev[j] = prev[j - 1] + point_dist(pred[0], truth[j]);
  for (std::size_t i = 1; i < n; ++i) {
    cur[0] = prev[0] + point_dist(pred[i], truth[0]);
    for (std::size_t j = 1; j < m; ++j)
      cur[j] = point_dist(pred[i], truth[j]) +
               std::min({prev[j], prev[j - 1], cur[j - 1]});
    std::swap(prev, cur);
  }
  return prev[m - 1];
}

namespace {

// Similarity of one n-gram pair: product over positions of exp(-beta*d).
double ngram_similarity(const std::vector<TrajectoryPoint>& a, std::size_t ia,
                        const std::vector<TrajectoryPoint>& b, std::size_t ib,
                        std::size_t n, double beta) {
  double sum_d = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    sum_d += point_dist(a[ia + k], b[ib + k]);
  return std::exp(-beta * sum_d);
}

// Modified n-gram precision with greedy maximum-similarity matching.
double modified_precision(const std::vector<TrajectoryPoint>& pred,
                          const std::vector<TrajectoryPoint>& truth,
                          std::size_t n, double beta, bool optimal) {
  const std::size_t np = pred.size() - n + 1;
  const std::size_t nt = truth.size() - n + 1;

  struct Pair {
    double sim;
    std::size_t i, j;
  };
  std::vector<Pair> pairs;
  pairs.reserve(np * nt);
  for (std::size_t i = 0; i < np; ++i)
    for (std::size_t j = 0; j < nt; ++j)
      pairs.push_back({ngram_similarity(pred, i, truth, j, n, beta), i, j});

  if (optimal) {
    // exhaustive assignment; only sane for tiny inputs
    if (np > 9 || nt > 9)
      throw DataError("geo_bleu: optimal matching limited to <= 9 n-grams");
    std::vector<bool> used(nt, false);
    auto best_from = [&](auto&& self, std::size_t i) -> double {
      if (i == np) return 0.0;
      // leaving an n-gram unmatched contributes 0
      double best = self(self, i + 1);
      for (std::size_t j = 0; j < nt; ++j) {
        if (used[j]) continue;
        used[j] = true;
        best = std::max(best, ngram_similarity(pred, i, truth, j, n, beta) +
                                  self(self, i + 1));
        used[j] = false;
      }
      return best;
    };
    return best_from(best_from, 0) / static_cast<double>(np);
  }

  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.sim != b.sim) return a.sim > b.sim;
    return std::pair{a.i, a.j} < std::pair{b.i, b.j};
  });

  std::vector<bool> used_p(np, false), used_t(nt, false);
  double total = 0.0;
  std::size_t matched = 0;
  const std::size_t max_matches = std::min(np, nt);
  for (const auto& pr : pairs) {
    if (matched == max_matches) break;
    if (used_p[pr.i] || used_t[pr.j]) continue;
    used_p[pr.i] = true;
    used_t[pr.j] = true;
    total += pr.sim;
    ++matched;
  }
  return total / static_cast<double>(np);
}

}  // namespace

double geo_bleu(const std::vector<TrajectoryPoint>& pred,
                const std::vector<TrajectoryPoint>& truth,
                const GeoBleuParams& params) {
  if (pred.empty() || truth.empty()) throw DataError("geo_bleu: empty input");
  if (params.max_n < 1 || params.beta <= 0.0)
    throw DataError("geo_bleu: invalid params");

  std::vector<double> weights = params.weights;
  if (weights.empty())
    weights.assign(params.max_n, 1.0 / params.max_n);
  if (static_cast<int>(weights.size()) != params.max_n)
    throw DataError("geo_bleu: weights length must equal max_n");

  // orders with no available n-grams are dropped; weights renormalized
  double log_sum = 0.0;
  double weight_sum = 0.0;
  for (int n = 1; n <= params.max_n; ++n) {
    if (pred.size() < static_cast<std::size_t>(n) ||
        truth.size() < static_cast<std::size_t>(n))
      continue;
    double p = modified_precision(pred, truth, static_cast<std::size_t>(n),
                                  params.beta, params.optimal_matching);
    if (p <= 0.0) return 0.0;
    log_sum += weights[n - 1] * std::log(p);
    weight_sum += weights[n - 1];
  }
  if (weight_sum <= 0.0) return 0.0;
  double geo_mean = std::exp(log_sum / weight_sum);

  double bp = std::min(
      1.0, std::exp(1.0 - static_cast<double>(truth.size()) /
                              static_cast<double>(pred.size())));
  return geo_mean * bp;
}

MetricsReport evaluate(
    const std::map<std::string, std::vector<TrajectoryPoint>>& predictions,
    const std::map<std::string, std::vector<TrajectoryPoint>>& truths,
    const GeoBleuParams& params) {
  MetricsReport report;
  report.params = params;
  for (const auto& [uid, truth] : truths) {
    auto it = predictions.find(uid);
    if (it == predictions.end())
      throw DataError("evaluate: no prediction for uid " + uid);
    if (it->second.empty())
      throw DataError("evaluate: empty prediction for uid " + uid);
    UserMetrics m;
    m.geobleu = geo_bleu(it->second, truth, params);
    m.dtw = dtw_distance(it->second, truth);
    report.per_user[uid] = m;
  }
  for (const auto& [uid, _] : predictions)
    if (!truths.contains(uid))
      throw DataError("evaluate: prediction for unknown uid " + uid);
  if (report.per_user.empty()) throw DataError("evaluate: no users");

  for (const auto& [uid, m] : report.per_user) {
    report.mean_geobleu += m.geobleu;
    report.mean_dtw += m.dtw;
  }
  report.mean_geobleu /= static_cast<double>(report.per_user.size());
  report.mean_dtw /= static_cast<double>(report.per_user.size());
  return report;
}

void write_metrics_json(const MetricsReport& report, std::ostream& out) {
  nlohmann::ordered_json j;
  j["params"] = {{"max_n", report.params.max_n},
                 {"beta", report.params.beta},
                 {"weights", report.params.weights.empty()
                                 ? std::vector<double>(
                                       report.params.max_n,
                                       1.0 / report.params.max_n)
                                 : report.params.weights},
                 {"matching", report.params.optimal_matching ? "optimal"
                                                             : "greedy"}};
  j["users"] = nlohmann::ordered_json::array();
  for (const auto& [uid, m] : report.per_user)
    j["users"].push_back(
        {{"uid", uid}, {"geobleu", m.geobleu}, {"dtw", m.dtw}});
  j["aggregate"] = {{"num_users", report.per_user.size()},
                    {"mean_geobleu", report.mean_geobleu},
                    {"mean_dtw", report.mean_dtw}};
  out << j.dump(2) << '\n';
}

void write_metrics_summary(const MetricsReport& report, std::ostream& out) {
  out << "uid\tgeobleu\tdtw\n";
  for (const auto& [uid, m] : report.per_user)
    out << uid << '\t' << m.geobleu << '\t' << m.dtw << '\n';
  out << "mean\t" << report.mean_geobleu << '\t' << report.mean_dtw << '\n';
}

}  // namespace mobcl
