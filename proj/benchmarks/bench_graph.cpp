#include <cmath>

#include <benchmark/benchmark.h>

#include "anisograph/graph.hpp"

namespace ag = anisograph;

namespace {

ag::GraphConfig se2_config(std::uint32_t n, std::uint32_t no) {
  return {ag::Metric(std::sqrt(0.1), ag::xi_from_alpha(1.0, no, n * n)), 1.0, 16};
}

void BM_KnnSe2(benchmark::State& state) {
  const auto n = static_cast<std::uint32_t>(state.range(0));
  const auto v = ag::grid_se2(n, n, 6);
  const auto cfg = se2_config(n, 6);
  for (auto _ : state) benchmark::DoNotOptimize(ag::knn_edges(v, cfg.metric, cfg.knn));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * v.size()));
}
BENCHMARK(BM_KnnSe2)->Arg(8)->Arg(16)->Arg(28)->Unit(benchmark::kMillisecond);

void BM_KnnSo3(benchmark::State& state) {
  const auto v = ag::grid_so3(static_cast<std::uint32_t>(state.range(0)), 6);
  const ag::Metric m(std::sqrt(0.1), ag::xi_from_alpha(1.0, 6, v.spec.spatial_count()));
  for (auto _ : state) benchmark::DoNotOptimize(ag::knn_edges(v, m, 16));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * v.size()));
}
BENCHMARK(BM_KnnSo3)->Arg(1)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_Laplacian(benchmark::State& state) {
  const auto n = static_cast<std::uint32_t>(state.range(0));
  const auto g = ag::build_graph(ag::grid_se2(n, n, 6), se2_config(n, 6));
  for (auto _ : state) benchmark::DoNotOptimize(ag::laplacian(g));
}
BENCHMARK(BM_Laplacian)->Arg(16)->Arg(28)->Unit(benchmark::kMicrosecond);

void BM_LambdaMax(benchmark::State& state) {
  const auto n = static_cast<std::uint32_t>(state.range(0));
  const auto l = ag::laplacian(ag::build_graph(ag::grid_se2(n, n, 6), se2_config(n, 6)));
  for (auto _ : state) benchmark::DoNotOptimize(ag::lambda_max(l));
}
BENCHMARK(BM_LambdaMax)->Arg(16)->Arg(28)->Unit(benchmark::kMillisecond);

}  // namespace
