#include <cmath>

#include <benchmark/benchmark.h>

#include "anisograph/network.hpp"
#include "anisograph/spectral.hpp"

namespace ag = anisograph;

namespace {

ag::Laplacian se2_laplacian(std::uint32_t n) {
  const ag::GraphConfig cfg{ag::Metric(std::sqrt(0.1), ag::xi_from_alpha(1.0, 6, n * n)), 1.0, 16};
  return ag::laplacian(ag::build_graph(ag::grid_se2(n, n, 6), cfg));
}

void BM_ChebApply(benchmark::State& state) {
  const auto l = ag::rescale(se2_laplacian(28), 2.0);
  const auto order = static_cast<std::size_t>(state.range(0));
  const auto d = static_cast<Eigen::Index>(state.range(1));
  ag::CounterRng rng(1);
  ag::ChebCoeffs c(order, d, d);
  for (auto& t : c.theta) t.setConstant(0.1);
  const ag::Signal x = ag::Signal::Constant(static_cast<Eigen::Index>(l.size()), d, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(ag::cheb_apply(l, x, c));
}
BENCHMARK(BM_ChebApply)->Args({4, 1})->Args({4, 8})->Args({8, 8})->Unit(benchmark::kMicrosecond);

void BM_ChebLayerBackward(benchmark::State& state) {
  auto l = std::make_shared<const ag::Laplacian>(ag::rescale(se2_laplacian(28), 2.0));
  ag::CounterRng rng(2);
  auto layer = ag::ChebLayer::random(l, 4, 8, 8, rng);
  const ag::Signal x = ag::Signal::Constant(static_cast<Eigen::Index>(l->size()), 8, 0.5);
  layer.forward(x);
  for (auto _ : state) benchmark::DoNotOptimize(layer.backward(x));
}
BENCHMARK(BM_ChebLayerBackward)->Unit(benchmark::kMicrosecond);

void BM_HeatDiffuse(benchmark::State& state) {
  const auto l = se2_laplacian(16);
  ag::Signal x = ag::Signal::Zero(static_cast<Eigen::Index>(l.size()), 1);
  x(0, 0) = 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(ag::heat_diffuse(l, x, 5.0, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_HeatDiffuse)->Arg(30)->Arg(60)->Unit(benchmark::kMicrosecond);

void BM_Eigensystem(benchmark::State& state) {
  const auto l = se2_laplacian(static_cast<std::uint32_t>(state.range(0)));
  ag::EigenOptions o;
  o.force_iterative = state.range(1) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(ag::eigensystem(l, 10, o));
}
BENCHMARK(BM_Eigensystem)->Args({8, 0})->Args({8, 1})->Args({16, 1})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
