// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <random>
#include <string>

#include "stancegen/annotation/kappa.hpp"
#include "stancegen/corpus/text_clean.hpp"
#include "stancegen/sdmg/fusion.hpp"
#include "stancegen/sdmg/gradcheck.hpp"

using namespace stancegen;
using sdmg::Index;
using sdmg::MatD;
using sdmg::VecD;

namespace {

MatD gaussian(std::mt19937_64& rng, Index r, Index c, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  MatD m(r, c);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

void BM_PooledAttention(benchmark::State& state) {
  const Index m = state.range(0), d = state.range(1);
  std::mt19937_64 rng(1);
  const sdmg::ProjectionParams<double> p{gaussian(rng, d, d, 0.1), gaussian(rng, d, d, 0.1),
                                         gaussian(rng, d, d, 0.1)};
  const MatD tokens = gaussian(rng, m, d);
  const VecD text = gaussian(rng, d, 1);
  for (auto _ : state) benchmark::DoNotOptimize(sdmg::tsa_attend_pooled(tokens, text, p));
  state.SetItemsProcessed(state.iterations() * m);
}
BENCHMARK(BM_PooledAttention)->Args({1, 64})->Args({8, 64})->Args({257, 64})->Args({257, 1024});

void BM_Fuse(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const VecD v = gaussian(rng, state.range(0), 1), t = gaussian(rng, state.range(0), 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sdmg::fuse(v, t, sdmg::FuseMode::add));
    benchmark::DoNotOptimize(sdmg::fuse(v, t, sdmg::FuseMode::concat));
  }
}
BENCHMARK(BM_Fuse)->Arg(64)->Arg(4096);

void BM_GradCheckPooled(benchmark::State& state) {
  const auto in = sdmg::make_gradcheck_inputs({}, 0);
  for (auto _ : state) benchmark::DoNotOptimize(sdmg::grad_check(sdmg::GradOp::tsa_attend_pooled, in, 1e-5));
}
BENCHMARK(BM_GradCheckPooled);

void BM_CleanText(benchmark::State& state) {
  std::string tweet;
  for (int i = 0; i < state.range(0); ++i) {
    tweet += "@user" + std::to_string(i) + " this is great!!! https://t.co/abc" + std::to_string(i) + " &amp; ";
  }
  for (auto _ : state) benchmark::DoNotOptimize(corpus::clean_text(tweet));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(tweet.size()));
}
BENCHMARK(BM_CleanText)->Arg(1)->Arg(16)->Arg(256);

void BM_Kappa(benchmark::State& state) {
  annotation::KappaInput in;
  std::mt19937_64 rng(3);
  const char* labels[] = {"FAVOR", "AGAINST"};
  for (int i = 0; i < state.range(0); ++i) in.pairs.emplace_back(labels[rng() % 2], labels[rng() % 2]);
  for (auto _ : state) benchmark::DoNotOptimize(annotation::cohen_kappa(in));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Kappa)->Arg(50)->Arg(12125);

}  // namespace

BENCHMARK_MAIN();
