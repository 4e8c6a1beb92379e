#include <benchmark/benchmark.h>

#include <map>
#include <random>

#include "graph_forest/dataset_io.hpp"
#include "graph_forest/ensemble.hpp"
#include "graph_forest/kernels.hpp"

using namespace graph_forest;
using kernels::MeanAggregator;

namespace {

const Graph& bench_graph(std::size_t n) {
  static std::map<std::size_t, Graph> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  SbmConfig cfg;
  cfg.n = n;
  cfg.d = 8;
  cfg.p_in = 20.0 * 3 / static_cast<double>(n);
  cfg.p_out = 2.0 * 3 / static_cast<double>(n);
  return cache.emplace(n, generate_sbm(cfg)).first->second;
}

Matrix random_rows(std::size_t n, Eigen::Index width) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal(0, 1);
  Matrix m(static_cast<Eigen::Index>(n), width);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

template <bool Serial, bool Transpose>
void BM_aggregate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  MeanAggregator op = MeanAggregator::from_graph(bench_graph(n));
  Matrix x = random_rows(n, 64), out;
  for (auto _ : state) {
    if constexpr (Transpose) {
      Serial ? op.apply_transpose_serial(x, out) : op.apply_transpose(x, out);
    } else {
      Serial ? op.apply_serial(x, out) : op.apply(x, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

template <bool Serial>
void BM_weighted_sum(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<Matrix> slices(25, random_rows(n, 7));
  std::vector<double> w(25, 1.0 / 25);
  Matrix out;
  for (auto _ : state) {
    Serial ? kernels::weighted_sum_serial(slices, w, out) : kernels::weighted_sum(slices, w, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_train_ensemble(benchmark::State& state) {
  const Graph& g = bench_graph(600);
  HyperParams hp;
  hp.epochs = 20;
  EnsembleConfig cfg;
  cfg.k = 8;
  for (auto _ : state) benchmark::DoNotOptimize(train_ensemble(g, cfg, hp, static_cast<int>(state.range(0))));
}

}  // namespace

BENCHMARK(BM_aggregate<true, false>)->Name("aggregate/serial")->Arg(1 << 12)->Arg(1 << 16);
BENCHMARK(BM_aggregate<false, false>)->Name("aggregate/omp")->Arg(1 << 12)->Arg(1 << 16);
BENCHMARK(BM_aggregate<true, true>)->Name("aggregate_transpose/serial")->Arg(1 << 12)->Arg(1 << 16);
BENCHMARK(BM_aggregate<false, true>)->Name("aggregate_transpose/omp")->Arg(1 << 12)->Arg(1 << 16);
BENCHMARK(BM_weighted_sum<true>)->Name("weighted_sum/serial")->Arg(1 << 12)->Arg(1 << 16);
BENCHMARK(BM_weighted_sum<false>)->Name("weighted_sum/omp")->Arg(1 << 12)->Arg(1 << 16);
BENCHMARK(BM_train_ensemble)->Name("train_ensemble/threads")->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
