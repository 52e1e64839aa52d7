#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "mobcl/dataset.hpp"

namespace mobcl {

struct GeoBleuParams {
  int max_n = 3;
  std::vector<double> weights;  // empty = equal 1/max_n
  double beta = 0.5;            // inverse cell units
  bool optimal_matching = false;  // exhaustive assignment for small inputs
};

/// Classic DTW with Euclidean point cost in cell units, unconstrained,
/// boundary-aligned.
double dtw_distance(const std::vector<TrajectoryPoint>& pred,
                    const std::vector<TrajectoryPoint>& truth);

/// Spatially-softened BLEU: n-gram similarity is the product over positions
/// of exp(-beta * d); greedy maximum-similarity matching without reuse;
/// geometric-mean combination with brevity penalty
/// min(1, exp(1 - |truth|/|pred|)).
double geo_bleu(const std::vector<TrajectoryPoint>& pred,
                const std::vector<TrajectoryPoint>& truth,
                const GeoBleuParams& params = {});

struct UserMetrics {
  double geobleu = 0.0;
  double dtw = 0.0;
};

struct MetricsReport {
  std::map<std::string, UserMetrics> per_user;
  double mean_geobleu = 0.0;
  double mean_dtw = 0.0;
  GeoBleuParams params;
};

MetricsReport evaluate(
    const std::map<std::string, std::vector<TrajectoryPoint>>& predictions,
    const std::map<std::string, std::vector<TrajectoryPoint>>& truths,
    const GeoBleuParams& params = {});

/// Machine-readable JSON report with per-user entries, aggregates, and a
/// parameter echo.
void write_metrics_json(const MetricsReport& report, std::ostream& out);

/// Human-readable summary table.
void write_metrics_summary(const MetricsReport& report, std::ostream& out);

}  // namespace mobcl
