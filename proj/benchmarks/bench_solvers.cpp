#include <benchmark/benchmark.h>

#include "gpiter/linear_system.hpp"
#include "gpiter/rng.hpp"
#include "gpiter/solvers.hpp"
#include "gpiter/synthetic.hpp"

namespace {

using namespace gpiter;

struct SolverFixture {
  std::shared_ptr<const Dataset> data;
  Hyperparameters hp = Hyperparameters::constant(4, 1.0);
  KernelOperator op;
  Eigen::MatrixXd targets;

  explicit SolverFixture(int n)
      : data(std::make_shared<Dataset>(make_synthetic_dataset(n, 4, hp, 7))),
        op(data, hp, {.block_rows = 1024, .dense_cache = true}),
        targets(n, 17) {
    targets.col(0) = data->targets;
    RandomStream stream(3, streams::kProbes);
    auto block = targets.rightCols(16);
    stream.fill_gaussian(block);
  }
};

void bench_solver(benchmark::State& state, SolverKind kind) {
  SolverFixture fixture(static_cast<int>(state.range(0)));
  SolverConfig config;
  config.kind = kind;
  config.tolerance = 0.01;
  config.max_epochs = 20;
  config.block_size = 500;
  config.batch_size = 500;
  config.learning_rate = 10.0;
  for (auto _ : state) {
    LinearSystemBatch batch(fixture.op, fixture.targets);
    benchmark::DoNotOptimize(solve(batch, config));
  }
}

void bench_cg(benchmark::State& state) { bench_solver(state, SolverKind::CG); }
void bench_ap(benchmark::State& state) { bench_solver(state, SolverKind::AP); }
void bench_sgd(benchmark::State& state) { bench_solver(state, SolverKind::SGD); }

}  // namespace

BENCHMARK(bench_cg)->Arg(1024);
BENCHMARK(bench_ap)->Arg(1024);
BENCHMARK(bench_sgd)->Arg(1024);
