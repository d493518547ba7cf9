#include <benchmark/benchmark.h>

#include "cmm/coupled_model.hpp"
#include "cmm/diffeo.hpp"
#include "cmm/exterior.hpp"
#include "cmm/moment_maps.hpp"
#include "cmm/parallel.hpp"
#include "cmm/torus.hpp"
#include "cmm/trig.hpp"

using namespace cmm;

static void BM_MixedVolumes(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  Rng rng(1);
  std::vector<double> a(binomial(dim, 2)), b(a.size()), m(dim / 2 + 1);
  for (auto& v : a) v = rng.normal();
  for (auto& v : b) v = rng.normal();
  for (auto _ : state) {
    mixed_volumes(dim, a.data(), b.data(), m.data());
    benchmark::DoNotOptimize(m.data());
  }
}
BENCHMARK(BM_MixedVolumes)->Arg(2)->Arg(4)->Arg(6);

static void BM_SpectralGradient(benchmark::State& state) {
  const TorusGrid grid{static_cast<int>(state.range(0)), static_cast<int>(state.range(1))};
  const ScalarField f = TrigPoly::random(grid.dim(), 2, 1.0, 2).sample(grid);
  for (auto _ : state) benchmark::DoNotOptimize(gradient(f));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(grid.size()));
}
BENCHMARK(BM_SpectralGradient)->Args({1, 64})->Args({1, 256})->Args({2, 16})->Unit(benchmark::kMillisecond);

static void BM_CcsckEvaluate(benchmark::State& state) {
  const int N = static_cast<int>(state.range(0));
  const TorusModel m({TorusGeometry::flat(1, N), TorusGeometry::flat(1, N, 1.3)}, {0}, {1.0});
  const Potentials phi = m.random(3, 0.05, 2);
  for (auto _ : state) benchmark::DoNotOptimize(m.evaluate(phi));
}
BENCHMARK(BM_CcsckEvaluate)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_ToricEvaluate(benchmark::State& state) {
  const int M = static_cast<int>(state.range(0));
  const ToricModel m({ToricCP1Geometry(1.0, M), ToricCP1Geometry(1.0, M)}, {0}, {1.0});
  const Potentials phi = m.random(4, 0.05, 3);
  for (auto _ : state) benchmark::DoNotOptimize(m.evaluate(phi));
}
BENCHMARK(BM_ToricEvaluate)->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);

static void BM_HamiltonianFlow(benchmark::State& state) {
  const TorusGeometry geom = TorusGeometry::flat(1, static_cast<int>(state.range(0)));
  const TrigPoly h = TrigPoly::random(2, 5, 1.0, 2);
  for (auto _ : state) {
    const DiffeoField f = hamiltonian_flow(geom, h, 0.3, 32);
    benchmark::DoNotOptimize(f.image().data());
  }
}
BENCHMARK(BM_HamiltonianFlow)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_MuP(benchmark::State& state) {
  const TorusGeometry X = TorusGeometry::flat(1, static_cast<int>(state.range(0)));
  const DiffeoField f = DiffeoField::displacement(X.grid(), VectorTrigField::random(2, 6, 0.2, 2));
  for (auto _ : state) benchmark::DoNotOptimize(mu_p(X, X, f, 0));
}
BENCHMARK(BM_MuP)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
