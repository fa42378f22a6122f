#include <benchmark/benchmark.h>

#include <random>

#include "chardep/chart.hpp"
#include "chardep/selfcheck.hpp"

using namespace chardep;

namespace {

ArcScores scores_for(int n) {
  std::mt19937_64 rng(n * 7919 + 1);
  return testgen::random_scores(n, rng);
}

ForestSpec spec_for(int n) {
  std::mt19937_64 rng(n * 104729 + 2);
  Segmentation seg = testgen::random_segmentation(n, rng);
  // A flat word tree keeps spec construction O(n) for any n.
  std::vector<Index> whead(seg.num_words() + 1, 1);
  whead[0] = -1;
  whead[1] = 0;
  return ForestSpec(std::move(seg), std::move(whead));
}

C2fArcScores c2f_scores_for(int n) {
  std::mt19937_64 rng(n * 31337 + 3);
  return testgen::random_c2f_scores(n, rng);
}

void BM_EisnerDecode(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ArcScores s = scores_for(n);
  for (auto _ : state) benchmark::DoNotOptimize(eisner_decode(s));
  state.SetComplexityN(n);
}

void BM_Inside(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ArcScores s = scores_for(n);
  for (auto _ : state) benchmark::DoNotOptimize(inside(s));
  state.SetComplexityN(n);
}

void BM_ConstrainedEisner(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ArcScores s = scores_for(n);
  const ForestSpec spec = spec_for(n);
  for (auto _ : state) benchmark::DoNotOptimize(constrained_eisner(s, spec));
  state.SetComplexityN(n);
}

void BM_ConstrainedInside(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ArcScores s = scores_for(n);
  const ForestSpec spec = spec_for(n);
  for (auto _ : state) benchmark::DoNotOptimize(constrained_inside(s, spec));
  state.SetComplexityN(n);
}

void BM_ArcMarginals(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ArcScores s = scores_for(n);
  const ForestSpec spec = spec_for(n);
  for (auto _ : state) benchmark::DoNotOptimize(arc_marginals(s, &spec));
  state.SetComplexityN(n);
}

void BM_C2fEisner(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const C2fArcScores s = c2f_scores_for(n);
  for (auto _ : state) benchmark::DoNotOptimize(c2f_eisner(s));
  state.SetComplexityN(n);
}

void BM_C2fInside(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const C2fArcScores s = c2f_scores_for(n);
  for (auto _ : state) benchmark::DoNotOptimize(c2f_inside(s));
  state.SetComplexityN(n);
}

}  // namespace

BENCHMARK(BM_EisnerDecode)->RangeMultiplier(2)->Range(8, 128)->Complexity();
BENCHMARK(BM_Inside)->RangeMultiplier(2)->Range(8, 128)->Complexity();
BENCHMARK(BM_ConstrainedEisner)->RangeMultiplier(2)->Range(8, 128)->Complexity();
BENCHMARK(BM_ConstrainedInside)->RangeMultiplier(2)->Range(8, 128)->Complexity();
BENCHMARK(BM_ArcMarginals)->RangeMultiplier(2)->Range(8, 128)->Complexity();
BENCHMARK(BM_C2fEisner)->RangeMultiplier(2)->Range(8, 128)->Complexity();
BENCHMARK(BM_C2fInside)->RangeMultiplier(2)->Range(8, 128)->Complexity();

BENCHMARK_MAIN();
