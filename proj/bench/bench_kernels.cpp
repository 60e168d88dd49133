// Serial reference vs OpenMP variants of the hot kernels.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "entroscan/classifier.hpp"
#include "entroscan/kernels.hpp"

using namespace entroscan;

namespace {

std::vector<std::uint8_t> bytes(std::size_t n) {
  std::mt19937_64 gen(1);
  std::vector<std::uint8_t> b(n);
  for (auto& x : b) x = static_cast<std::uint8_t>(gen());
  return b;
}

std::vector<double> uniform(std::size_t n, double hi, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(gen);
  return v;
}

template <auto Kernel>
void BM_window_entropies(benchmark::State& state) {
  const auto stream = bytes(static_cast<std::size_t>(state.range(0)));
  std::vector<double> out(stream.size() / 256);
  for (auto _ : state) {
    Kernel(stream, 256, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * stream.size()));
}

template <auto Kernel>
void BM_assign_nearest(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0)), k = 250, dim = 7;
  const auto points = uniform(n * dim, 8.0, 2);
  const auto centroids = uniform(k * dim, 8.0, 3);
  std::vector<std::uint32_t> labels(n);
  std::vector<double> dist(n);
  for (auto _ : state) {
    Kernel(points, centroids, dim, labels, dist);
    benchmark::DoNotOptimize(labels.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}

const Forest& bench_forest() {
  static const Forest forest = [] {
    const std::size_t n = 600, dim = 276;
    auto rows = uniform(n * dim, 1.0, 4);
    std::vector<Label> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      labels[i] = rows[i * dim] + rows[i * dim + 1] > 1.0 ? Label::Malicious : Label::Benign;
    }
    ForestConfig config;
    config.n_trees = 200;
    config.seed = 5;
    return train_forest(rows, dim, labels, config);
  }();
  return forest;
}

template <auto Kernel>
void BM_score_rows(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const Forest& forest = bench_forest();
  const auto rows = uniform(n * forest.feature_dim, 1.0, 6);
  std::vector<double> out(n);
  for (auto _ : state) {
    Kernel(forest, rows, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}

}  // namespace

BENCHMARK(BM_window_entropies<serial::window_entropies>)->Name("window_entropies/serial")->Arg(1 << 20)->Arg(1 << 24);
BENCHMARK(BM_window_entropies<parallel::window_entropies>)->Name("window_entropies/omp")->Arg(1 << 20)->Arg(1 << 24);
BENCHMARK(BM_assign_nearest<serial::assign_nearest>)->Name("assign_nearest/serial")->Arg(1 << 12)->Arg(1 << 16);
BENCHMARK(BM_assign_nearest<parallel::assign_nearest>)->Name("assign_nearest/omp")->Arg(1 << 12)->Arg(1 << 16);
BENCHMARK(BM_score_rows<serial::score_rows>)->Name("score_rows/serial")->Arg(300)->Arg(3000);
BENCHMARK(BM_score_rows<parallel::score_rows>)->Name("score_rows/omp")->Arg(300)->Arg(3000);

BENCHMARK_MAIN();
