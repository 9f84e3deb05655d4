#include <benchmark/benchmark.h>

#include "steer/lhs.hpp"
#include "steer/quantifiers.hpp"
#include "steer/random.hpp"

using namespace steer;

static void BM_EigHermitian(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const auto m = HermitianOperator::symmetrized(ginibre(n, n, rng));
  for (auto _ : state) benchmark::DoNotOptimize(eig_hermitian(m));
}
BENCHMARK(BM_EigHermitian)->Arg(2)->Arg(4)->Arg(8)->Arg(16);

static void BM_LogFrechet(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  const auto sigma = random_density(n, n, rng).op();
  const auto h = HermitianOperator::symmetrized(ginibre(n, n, rng));
  for (auto _ : state) benchmark::DoNotOptimize(log_frechet_apply(sigma, h));
}
BENCHMARK(BM_LogFrechet)->Arg(2)->Arg(3)->Arg(8);

static void BM_FeasibilityWerner(benchmark::State& state) {
  const auto a = werner_assemblage(static_cast<double>(state.range(0)) / 100.0);
  for (auto _ : state) benchmark::DoNotOptimize(lhs_feasibility(a));
}
BENCHMARK(BM_FeasibilityWerner)->Arg(50)->Arg(90)->Unit(benchmark::kMillisecond);

static void BM_InnerSinglet(benchmark::State& state) {
  const auto a = werner_assemblage(1.0);
  const auto p = ProbabilityVector::uniform(2);
  for (auto _ : state) benchmark::DoNotOptimize(inner_inf_relative_entropy(a, p));
}
BENCHMARK(BM_InnerSinglet)->Unit(benchmark::kMillisecond);

// Desk shapes |X| = |A| = k, d_B = 2.
static void BM_RestrictedRes(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  Rng rng(3);
  const auto a = random_assemblage(k, k, 2, rng);
  for (auto _ : state) benchmark::DoNotOptimize(restricted_res(a));
}
BENCHMARK(BM_RestrictedRes)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
