#include <benchmark/benchmark.h>

#include <numeric>
#include <random>
#include <vector>

#include "nomafl/flcore.hpp"
#include "nomafl/rng.hpp"

namespace {

nomafl::Samples mnist_like(std::size_t n) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<float> px(0.0f, 1.0f);
  nomafl::Samples s;
  s.feature_dim = 784;
  std::vector<float> row(784);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : row) v = px(rng);
    s.push_back(row, static_cast<int>(i % 10));
  }
  return s;
}

const nomafl::Architecture kLenet{{784, 300, 100, 10}};

void BM_LossAndGrad(benchmark::State& state) {
  const auto model = nomafl::init_model(kLenet, 1);
  const auto data = mnist_like(static_cast<std::size_t>(state.range(0)));
  std::vector<std::size_t> batch(data.size());
  std::iota(batch.begin(), batch.end(), std::size_t{0});
  for (auto _ : state) benchmark::DoNotOptimize(nomafl::loss_and_grad(model, data, batch));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LossAndGrad)->Arg(10)->Arg(100)->Unit(benchmark::kMicrosecond);

void BM_LocalEpoch(benchmark::State& state) {
  const auto model = nomafl::init_model(kLenet, 1);
  const auto data = mnist_like(90);
  for (auto _ : state) {
    nomafl::Rng rng = nomafl::make_stream(1, nomafl::StreamTag::kLocalTraining);
    benchmark::DoNotOptimize(nomafl::local_train(model, data, {1, 0.001, 10}, rng));
  }
  state.SetItemsProcessed(state.iterations() * 90);
}
BENCHMARK(BM_LocalEpoch)->Unit(benchmark::kMillisecond);

void BM_Evaluate(benchmark::State& state) {
  const auto model = nomafl::init_model(kLenet, 1);
  const auto data = mnist_like(1000);
  for (auto _ : state) benchmark::DoNotOptimize(nomafl::accuracy(model, data));
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_Evaluate)->Unit(benchmark::kMillisecond);

}  // namespace
