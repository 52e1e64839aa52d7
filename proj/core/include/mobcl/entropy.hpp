#pragma once

#include <cstdint>
#include <vector>

#include "mobcl/dataset.hpp"

namespace mobcl {

/// Flattened 1D cell sequence: symbol = x*(y_max+1) + y.
using SymbolSequence = std::vector<std::int64_t>;

struct LZParse {
  std::vector<std::vector<std::int64_t>> phrases;
  std::size_t dict_size = 0;  // |D|, includes a possibly duplicate tail phrase
  std::size_t consumed = 0;   // N, equals input length
  double mean_phrase_len = 0.0;  // N / |D|
};

struct FanoBound {
  double entropy_bits = 0.0;
  std::int64_t alphabet = 0;
  double max_accuracy = 0.0;
};

struct Histogram {
  std::vector<std::size_t> counts;  // equal-width bins over [0,1]
  std::size_t total = 0;
};

SymbolSequence symbolize(const Trajectory& traj, const GridSpec& grid);

/// Greedy left-to-right parse into shortest previously-unseen phrases.
/// A fully-seen tail at end of input is emitted as one extra phrase.
LZParse lz_parse(const SymbolSequence& seq);

/// H_LZ = ln(N) / (Q_bar * ln 2). Requires N >= 2.
double lz_entropy(const LZParse& parse);

/// H_LZ / log2(N) = |D| / N, clamped to [0,1]; 0 for length-1 sequences.
double normalized_entropy(const SymbolSequence& seq);

/// Largest accuracy consistent with the Fano bound for entropy H over an
/// alphabet of Q symbols, solved by bisection to 1e-9. H is clamped to
/// [0, log2 Q].
double fano_max_accuracy(double entropy_bits, std::int64_t alphabet);

double trajectory_entropy(const Trajectory& traj, const GridSpec& grid);

Histogram entropy_histogram(const Dataset& ds, std::size_t bins);

}  // namespace mobcl
