#include <benchmark/benchmark.h>

#include "gpiter/kernel.hpp"
#include "gpiter/rng.hpp"
#include "gpiter/synthetic.hpp"

namespace {

using namespace gpiter;

std::shared_ptr<const Dataset> bench_data(int n, int d) {
  static std::shared_ptr<const Dataset> cached;
  static int cached_n = 0, cached_d = 0;
  if (!cached || cached_n != n || cached_d != d) {
    cached = std::make_shared<Dataset>(
        make_synthetic_dataset(n, d, Hyperparameters::constant(d, 1.0), 42));
    cached_n = n;
    cached_d = d;
  }
  return cached;
}

void bench_hmatvec(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int block = static_cast<int>(state.range(1));
  auto data = bench_data(n, 4);
  KernelOperatorOptions options;
  options.block_rows = block;
  KernelOperator op(data, Hyperparameters::constant(4, 1.0), options);
  Eigen::MatrixXd v(n, 65);
  RandomStream stream(1, streams::kProbes);
  stream.fill_gaussian(v);
  for (auto _ : state) {
    benchmark::DoNotOptimize(op.apply(v));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n) * n);
}

void bench_hmatvec_cached(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto data = bench_data(n, 4);
  KernelOperatorOptions options;
  options.dense_cache = true;
  KernelOperator op(data, Hyperparameters::constant(4, 1.0), options);
  Eigen::MatrixXd v(n, 65);
  RandomStream stream(1, streams::kProbes);
  stream.fill_gaussian(v);
  for (auto _ : state) {
    benchmark::DoNotOptimize(op.apply(v));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n) * n);
}

void bench_gradient_pass(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto data = bench_data(n, 4);
  KernelOperator op(data, Hyperparameters::constant(4, 1.0));
  Eigen::MatrixXd u(n, 64), w(n, 64);
  RandomStream stream(2, streams::kProbes);
  stream.fill_gaussian(u);
  stream.fill_gaussian(w);
  for (auto _ : state) {
    benchmark::DoNotOptimize(op.derivative_quadratic_forms(u, w));
  }
}

}  // namespace

BENCHMARK(bench_hmatvec)->Args({1024, 256})->Args({1024, 1024})->Args({2048, 1024});
BENCHMARK(bench_hmatvec_cached)->Arg(1024)->Arg(2048);
BENCHMARK(bench_gradient_pass)->Arg(512)->Arg(1024);

BENCHMARK_MAIN();
