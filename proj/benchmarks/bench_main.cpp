#include <benchmark/benchmark.h>

#include <random>

#include "mobcl/entropy.hpp"
#include "mobcl/features.hpp"
#include "mobcl/metrics.hpp"
#include "mobcl/model/net.hpp"
#include "mobcl/synth.hpp"

using namespace mobcl;

namespace {

SymbolSequence random_sequence(std::size_t n, std::int64_t alphabet,
                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  SymbolSequence seq(n);
  for (auto& s : seq)
    s = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(alphabet));
  return seq;
}

std::vector<TrajectoryPoint> random_points(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<TrajectoryPoint> p;
  for (std::size_t i = 0; i < n; ++i)
    p.push_back({0, static_cast<int>(i), static_cast<int>(rng() % 20),
                 static_cast<int>(rng() % 20)});
  return p;
}

void BM_LzParse(benchmark::State& state) {
  auto seq = random_sequence(static_cast<std::size_t>(state.range(0)), 400, 1);
  for (auto _ : state) benchmark::DoNotOptimize(lz_parse(seq));
}
BENCHMARK(BM_LzParse)->Arg(100)->Arg(1000)->Arg(3600);

void BM_NormalizedEntropy(benchmark::State& state) {
  auto seq = random_sequence(static_cast<std::size_t>(state.range(0)), 400, 2);
  for (auto _ : state) benchmark::DoNotOptimize(normalized_entropy(seq));
}
BENCHMARK(BM_NormalizedEntropy)->Arg(1000)->Arg(3600);

void BM_Dtw(benchmark::State& state) {
  auto a = random_points(static_cast<std::size_t>(state.range(0)), 3);
  auto b = random_points(static_cast<std::size_t>(state.range(0)), 4);
  for (auto _ : state) benchmark::DoNotOptimize(dtw_distance(a, b));
}
BENCHMARK(BM_Dtw)->Arg(50)->Arg(200)->Arg(720);

void BM_GeoBleu(benchmark::State& state) {
  auto a = random_points(static_cast<std::size_t>(state.range(0)), 5);
  auto b = random_points(static_cast<std::size_t>(state.range(0)), 6);
  for (auto _ : state) benchmark::DoNotOptimize(geo_bleu(a, b));
}
BENCHMARK(BM_GeoBleu)->Arg(50)->Arg(200);

void BM_ForwardBackward(benchmark::State& state) {
  ModelConfig cfg;
  cfg.grid = {20, 20, 500.0};
  cfg.time = {48, 15};
  SynthConfig scfg;
  scfg.grid = cfg.grid;
  scfg.time = cfg.time;
  scfg.num_users = 1;
  scfg.sparsity = 0.93;
  scfg.seed = 9;
  Dataset ds = synth_generate(scfg);
  ModelSample sample =
      build_model_sample(ds.trajectories.begin()->second, nullptr,
                         cfg.features, 10, 5, cfg.grid, cfg.time);
  Network net(cfg);
  std::vector<const ModelSample*> batch = {&sample};
  for (auto _ : state) {
    net.params().zero_grads();
    benchmark::DoNotOptimize(net.forward_backward(batch));
  }
}
BENCHMARK(BM_ForwardBackward);

}  // namespace

BENCHMARK_MAIN();
