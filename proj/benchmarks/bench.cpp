#include <benchmark/benchmark.h>

#include <gce/estimator.hpp>
#include <gce/harness.hpp>
#include <gce/model.hpp>
#include <gce/synthetic.hpp>

namespace {

const gce::SyntheticData& workload() {
  static gce::SyntheticData data = [] {
    gce::SyntheticSpec spec;
    spec.num_features = 2;
    spec.cardinalities = {50, 20};
    spec.dist = gce::SymbolDistribution::zipf;
    spec.n = 4096;
    spec.noise_std = 0.1;
    spec.seed = 99;
    return gce::generate_synthetic(spec);
  }();
  return data;
}

void backward_product(benchmark::State& state) {
  const gce::SyntheticData& w = workload();
  gce::ParamStore params = gce::init_params(w.model, w.dataset.schema(), 1);
  std::size_t i = 0;
  for (auto _ : state) {
    const gce::Row& row = w.dataset.row(i++ % w.dataset.size());
    benchmark::DoNotOptimize(
        gce::backward(w.model, params, row, row.target));
  }
}
BENCHMARK(backward_product);

void backward_mlp(benchmark::State& state) {
  const gce::SyntheticData& w = workload();
  gce::ModelSpec spec = gce::ModelSpec::make_mlp({});
  gce::ParamStore params = gce::init_params(spec, w.dataset.schema(), 1);
  std::size_t i = 0;
  for (auto _ : state) {
    const gce::Row& row = w.dataset.row(i++ % w.dataset.size());
    benchmark::DoNotOptimize(gce::backward(spec, params, row, row.target));
  }
}
BENCHMARK(backward_mlp);

void batch_accumulate_finalize(benchmark::State& state) {
  const gce::SyntheticData& w = workload();
  gce::ParamStore params = gce::init_params(w.model, w.dataset.schema(), 1);
  auto mode = static_cast<gce::EstimatorMode>(state.range(0));
  std::size_t batch = 256;

  std::vector<gce::GradMap> grads;
  grads.reserve(batch);
  for (std::size_t i = 0; i < batch; ++i) {
    const gce::Row& row = w.dataset.row(i);
    grads.push_back(gce::backward(w.model, params, row, row.target));
  }

  gce::GradAccumulator acc(params);
  for (auto _ : state) {
    acc.reset();
    for (std::size_t i = 0; i < batch; ++i)
      acc.accumulate(grads[i], w.dataset.row(i));
    benchmark::DoNotOptimize(acc.finalize(mode));
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(batch));
}
BENCHMARK(batch_accumulate_finalize)
    ->Arg(static_cast<int>(gce::EstimatorMode::classic))
    ->Arg(static_cast<int>(gce::EstimatorMode::gce));

void train_epoch_mlp(benchmark::State& state) {
  gce::TrainConfig config;
  gce::SyntheticSpec spec;
  spec.num_features = 1;
  spec.cardinalities = {50};
  spec.dist = gce::SymbolDistribution::zipf;
  spec.n = 2048;
  spec.noise_std = 0.1;
  spec.seed = 5;
  config.source = spec;
  config.model = gce::ModelSpec::make_mlp({});
  config.optimizer = gce::OptimizerKind::adagrad;
  config.mode = static_cast<gce::EstimatorMode>(state.range(0));
  config.batch_size = 32;
  config.epochs = 1;
  gce::EncodedDataset data = gce::load_source(config.source);
  for (auto _ : state)
    benchmark::DoNotOptimize(gce::run_training(config, data));
}
BENCHMARK(train_epoch_mlp)
    ->Arg(static_cast<int>(gce::EstimatorMode::classic))
    ->Arg(static_cast<int>(gce::EstimatorMode::gce))
    ->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
