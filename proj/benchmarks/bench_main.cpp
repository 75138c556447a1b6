#include <benchmark/benchmark.h>

#include <memory>

#include "hypmin/bundles.hpp"
#include "hypmin/germsolve.hpp"
#include "hypmin/hypmesh.hpp"
#include "hypmin/pipeline.hpp"

using namespace hypmin;

static void BM_BuildSurface(benchmark::State& state) {
  const int r = static_cast<int>(state.range(0));
  for (auto _ : state) {
    mesh::SurfaceMesh m = mesh::build_surface(2, r);
    benchmark::DoNotOptimize(m.total_area);
  }
  state.counters["vertices"] = static_cast<double>(mesh::build_surface(2, r).num_vertices());
}
BENCHMARK(BM_BuildSurface)->DenseRange(3, 5)->Unit(benchmark::kMillisecond);

static void BM_DbarKernel(benchmark::State& state) {
  const auto m = std::make_shared<const mesh::SurfaceMesh>(mesh::build_surface(2, static_cast<int>(state.range(0))));
  const bundles::LineBundle L = bundles::make_line_bundle(*m, 1);
  const bundles::DbarOperator d = bundles::dbar_operator(*m, L, 2, 1);
  for (auto _ : state) {
    bundles::HolomorphicBasis b = bundles::holomorphic_basis(d);
    benchmark::DoNotOptimize(b.gap_ratio);
  }
}
BENCHMARK(BM_DbarKernel)->DenseRange(4, 5)->Unit(benchmark::kMillisecond);

static void BM_SolveManufactured(benchmark::State& state) {
  const auto m = std::make_shared<const mesh::SurfaceMesh>(mesh::build_surface(2, static_cast<int>(state.range(0))));
  const pipeline::Manufactured mms = pipeline::manufactured_solution(*m, 0.1);
  const germ::GermData3 data = germ::make_forced_germ3(m, mms.forcing);
  for (auto _ : state) {
    germ::GermSolution s = germ::solve_gauss3(data);
    benchmark::DoNotOptimize(s.residual);
  }
}
BENCHMARK(BM_SolveManufactured)->DenseRange(4, 5)->Unit(benchmark::kMillisecond);

static void BM_SuperminimalRun(benchmark::State& state) {
  pipeline::RunConfig c;
  c.resolution = static_cast<int>(state.range(0));
  c.l = 1;
  c.data.kind = pipeline::DataKind::BasisElement;
  c.data.amplitude1 = 0.0;
  for (auto _ : state) {
    pipeline::RunResult r = pipeline::run(c);
    benchmark::DoNotOptimize(r.passed);
  }
}
BENCHMARK(BM_SuperminimalRun)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
