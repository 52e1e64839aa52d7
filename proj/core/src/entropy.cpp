#include "mobcl/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace mobcl {

namespace {

struct SpanHash {
  std::size_t operator()(const std::vector<std::int64_t>& v) const {
    std::size_t h = 1469598103934665603ull;
    for (auto s : v) {
      h ^= static_cast<std::size_t>(s) + 0x9e3779b97f4a7c15ull;
      h *= 1099511628211ull;
    }
    return h;
  }
};

}  // namespace

SymbolSequence symbolize(const Trajectory& traj, const GridSpec& grid) {
  SymbolSequence seq;
  seq.reserve(traj.points.size());
  for (const auto& p : traj.points)
    seq.push_back(static_cast<std::int64_t>(p.x) * (grid.y_max() + 1) + p.y);
  return seq;
}

LZParse lz_parse(const SymbolSequence& seq) {
  if (seq.empty()) throw std::invalid_argument("lz_parse: empty sequence");

  LZParse result;
  std::unordered_set<std::vector<std::int64_t>, SpanHash> dict;
  std::size_t pos = 0;
  const std::size_t n = seq.size();
  while (pos < n) {
    std::vector<std::int64_t> phrase;
    std::size_t q = 0;
    while (pos + q < n) {
      phrase.push_back(seq[pos + q]);
      ++q;
      if (!dict.contains(phrase)) break;
    }
    // loop exits either on a novel phrase or with the fully-seen tail
    dict.insert(phrase);
    pos += phrase.size();
    result.phrases.push_back(std::move(phrase));
  }
  result.dict_size = result.phrases.size();
  result.consumed = n;
  result.mean_phrase_len =
      static_cast<double>(n) / static_cast<double>(result.dict_size);
  return result;
}

double lz_entropy(const LZParse& parse) {
  if (parse.consumed < 2)
    throw std::invalid_argument("lz_entropy: need N >= 2");
  return std::log(static_cast<double>(parse.consumed)) /
         (parse.mean_phrase_len * std::log(2.0));
}

double normalized_entropy(const SymbolSequence& seq) {
  if (seq.empty())
    throw std::invalid_argument("normalized_entropy: empty sequence");
  if (seq.size() == 1) return 0.0;
  auto parse = lz_parse(seq);
  // H_LZ / log2(N) simplifies to |D| / N
  double h = static_cast<double>(parse.dict_size) /
             static_cast<double>(parse.consumed);
  return std::clamp(h, 0.0, 1.0);
}

namespace {

double log2_safe(double x) { return x <= 0.0 ? 0.0 : std::log2(x); }

// Right-hand side of the Fano inequality as a function of accuracy phi:
// H_b(phi) + (1-phi) log2(Q-1), with 0*log2(0) = 0. Monotone decreasing on
// [1/Q, 1].
double fano_rhs(double phi, double q) {
  double hb = -phi * log2_safe(phi) - (1.0 - phi) * log2_safe(1.0 - phi);
  return hb + (1.0 - phi) * std::log2(q - 1.0);
}

}  // namespace

double fano_max_accuracy(double entropy_bits, std::int64_t alphabet) {
  if (alphabet < 2)
    throw std::invalid_argument("fano_max_accuracy: alphabet must be >= 2");
  const double q = static_cast<double>(alphabet);
  const double h_max = std::log2(q);
  const double h = std::clamp(entropy_bits, 0.0, h_max);

  double lo = 1.0 / q;  // rhs(lo) = log2 Q
  double hi = 1.0;      // rhs(hi) = 0
  if (h <= 0.0) return 1.0;
  if (h >= h_max) return lo;
  for (int iter = 0; iter < 200 && hi - lo > 1e-9; ++iter) {
    double mid = 0.5 * (lo + hi);
    if (fano_rhs(mid, q) >= h)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double trajectory_entropy(const Trajectory& traj, const GridSpec& grid) {
  return normalized_entropy(symbolize(traj, grid));
}

Histogram entropy_histogram(const Dataset& ds, std::size_t bins) {
  if (bins < 1)
    throw std::invalid_argument("entropy_histogram: bins must be >= 1");
  Histogram hist;
  hist.counts.assign(bins, 0);
  for (const auto& [uid, traj] : ds.trajectories) {
    double h = trajectory_entropy(traj, ds.grid);
    auto bin = static_cast<std::size_t>(h * static_cast<double>(bins));
    if (bin >= bins) bin = bins - 1;  // h == 1.0 lands in the last bin
    ++hist.counts[bin];
    ++hist.total;
  }
  return hist;
}

}  // namespace mobcl
