#include <benchmark/benchmark.h>

#include <cmath>

#include "difflab/asymptotics.hpp"
#include "difflab/distance.hpp"
#include "difflab/evolution.hpp"
#include "difflab/form.hpp"

using namespace difflab;

namespace {

std::shared_ptr<const Grid> square(int n)
{
  return std::make_shared<const Grid>(Grid::rectangle({-2.0, 2.0}, {-2.0, 2.0}, {n, n}));
}

std::shared_ptr<const Grid> line(int n)
{
  return std::make_shared<const Grid>(Grid::line(-8.0, 8.0, n));
}

void BM_Assemble2D(benchmark::State &state)
{
  const auto g = square(static_cast<int>(state.range(0)));
  const auto field = make_c_delta_2d(0.75, 0.5);
  for (auto _ : state)
    benchmark::DoNotOptimize(assemble(field, g));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g->node_count()));
}
BENCHMARK(BM_Assemble2D)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Eikonal2D(benchmark::State &state)
{
  const auto g = square(static_cast<int>(state.range(0)));
  const DiscreteForm h = assemble(make_c_delta_2d(0.75, 0.5), g);
  const RegionSet b = RegionSet::box(*g, {-0.1, 0.1}, {-1.1, -0.9});
  for (auto _ : state)
    benchmark::DoNotOptimize(eikonal_distance(h, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g->node_count()));
}
BENCHMARK(BM_Eikonal2D)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Trace1D(benchmark::State &state)
{
  const auto g = line(static_cast<int>(state.range(0)));
  const DiscreteForm h = assemble(make_c_delta(0.25), g);
  const RegionSet a = RegionSet::interval(*g, -2.0, -1.0);
  const RegionSet b = RegionSet::interval(*g, 1.0, 2.0);
  const auto times = log_spaced(5e-3, 2e-2, 8);
  for (auto _ : state)
    benchmark::DoNotOptimize(trace_inner_products(h, a, b, times));
}
BENCHMARK(BM_Trace1D)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);

void BM_Semigroup(benchmark::State &state)
{
  const auto g = line(512);
  const DiscreteForm h = assemble(make_c_delta(0.5), g);
  const auto phi = RegionSet::interval(*g, -1.0, 1.0).indicator();
  SolverOptions opts;
  opts.kind = static_cast<SolverKind>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(apply_semigroup(h, 1e-3, phi, 1e-10, opts));
  state.SetLabel(to_string(opts.kind));
}
BENCHMARK(BM_Semigroup)
  ->Arg(static_cast<int>(SolverKind::DenseSpectral))
  ->Arg(static_cast<int>(SolverKind::Uniformization))
  ->Arg(static_cast<int>(SolverKind::Krylov))
  ->Unit(benchmark::kMillisecond);

void BM_Cosine(benchmark::State &state)
{
  const auto g = square(static_cast<int>(state.range(0)));
  const DiscreteForm h = assemble(make_constant(2, {2.0, 0.3, 1.0}), g);
  const auto phi = RegionSet::box(*g, {-0.2, 0.2}, {-0.2, 0.2}).indicator();
  const double t = 0.5 / std::sqrt(h.lambda_bound());
  for (auto _ : state)
    benchmark::DoNotOptimize(apply_cosine(h, t, phi, 1e-10));
}
BENCHMARK(BM_Cosine)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
