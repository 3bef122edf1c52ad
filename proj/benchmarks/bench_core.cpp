#include <benchmark/benchmark.h>

#include <random>

#include "p2l/divergence.hpp"
#include "p2l/estimator.hpp"
#include "p2l/summarize.hpp"

namespace {

using namespace p2l;

std::vector<double> simplex(std::mt19937_64& rng, std::size_t dim) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> v(dim);
  double s = 0.0;
  for (auto& x : v) s += (x = e(rng) + 1e-9);
  for (auto& x : v) x /= s;
  return v;
}

EmbeddingMatrix matrix(std::mt19937_64& rng, std::size_t items, std::size_t dim) {
  std::uniform_real_distribution<double> u(0.0, 4.0);
  std::vector<double> v(items * dim);
  for (auto& x : v) x = u(rng);
  return EmbeddingMatrix(items, dim, std::move(v), "bench");
}

DatasetProfile profile(std::mt19937_64& rng, const std::string& name, std::size_t dim, Role role) {
  DatasetProfile p;
  p.name = name;
  p.size = 100 + rng() % 100000;
  p.summary.values = simplex(rng, dim);
  p.summary.raw_mean = p.summary.values;
  p.extractor_id = "bench";
  p.role = role;
  return p;
}

void BM_Distance(benchmark::State& state) {
  const auto kind = static_cast<DivergenceKind>(state.range(0));
  const auto dim = static_cast<std::size_t>(state.range(1));
  std::mt19937_64 rng(1);
  SummaryVector p, q;
  p.values = simplex(rng, dim);
  q.values = simplex(rng, dim);
  for (auto _ : state) benchmark::DoNotOptimize(distance(kind, p, q, 1e-10));
  state.SetLabel(std::string(to_string(kind)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(dim));
}
BENCHMARK(BM_Distance)->ArgsProduct({{0, 1, 2, 3, 4}, {64, 2048}});

void BM_ScoreSources(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t dim = 2048;
  std::mt19937_64 rng(2);
  const auto target = profile(rng, "t", dim, Role::Target);
  std::vector<DatasetProfile> sources;
  for (std::size_t i = 0; i < n; ++i) sources.push_back(profile(rng, "s" + std::to_string(i), dim, Role::Source));
  EstimatorConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(score_sources(target, sources, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_ScoreSources)->RangeMultiplier(4)->Range(4, 256);

void BM_Summarize(benchmark::State& state) {
  const auto items = static_cast<std::size_t>(state.range(0));
  const bool trimmed = state.range(1) != 0;
  std::mt19937_64 rng(3);
  const auto m = matrix(rng, items, 256);
  const auto how = trimmed ? Summarizer::trimmed(0.1) : Summarizer::mean();
  for (auto _ : state) benchmark::DoNotOptimize(summarize(m, how));
  state.SetLabel(trimmed ? "trimmed" : "mean");
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(items));
}
BENCHMARK(BM_Summarize)->ArgsProduct({{100, 10000}, {0, 1}});

}  // namespace
BENCHMARK_MAIN();
