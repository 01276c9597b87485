#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "nomafl/compress.hpp"

namespace {

std::vector<double> update(std::size_t n) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> d(0.0, 0.01);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

constexpr std::size_t kLenet = 266'610;

void BM_EncodeQuantized(benchmark::State& state) {
  const auto v = update(kLenet);
  const auto budget = static_cast<std::uint64_t>(state.range(0)) * kLenet;
  for (auto _ : state) benchmark::DoNotOptimize(nomafl::encode_quantized(v, budget));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(kLenet));
}
BENCHMARK(BM_EncodeQuantized)->Arg(2)->Arg(8)->Arg(18)->Unit(benchmark::kMillisecond);

void BM_DecodeQuantized(benchmark::State& state) {
  const auto v = update(kLenet);
  const auto enc = nomafl::encode_quantized(v, static_cast<std::uint64_t>(state.range(0)) * kLenet);
  for (auto _ : state) {
    benchmark::DoNotOptimize(nomafl::decode(nomafl::Codec::kQuantize, enc.wire, kLenet));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(kLenet));
}
BENCHMARK(BM_DecodeQuantized)->Arg(2)->Arg(18)->Unit(benchmark::kMillisecond);

void BM_EncodeSparse(benchmark::State& state) {
  const auto v = update(kLenet);
  const auto budget = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(nomafl::encode_sparse(v, budget));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(kLenet));
}
BENCHMARK(BM_EncodeSparse)->Arg(100'000)->Arg(1'000'000)->Arg(5'000'000)->Unit(benchmark::kMillisecond);

void BM_DecodeSparse(benchmark::State& state) {
  const auto v = update(kLenet);
  const auto enc = nomafl::encode_sparse(v, static_cast<std::uint64_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(nomafl::decode(nomafl::Codec::kSparsify, enc.wire, kLenet));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(kLenet));
}
BENCHMARK(BM_DecodeSparse)->Arg(100'000)->Arg(5'000'000)->Unit(benchmark::kMillisecond);

void BM_SolveSparsityRatio(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(nomafl::solve_sparsity_ratio(32 * kLenet, 1'000'000));
}
BENCHMARK(BM_SolveSparsityRatio);

}  // namespace
