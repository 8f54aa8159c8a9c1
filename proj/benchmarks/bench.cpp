#include <benchmark/benchmark.h>

#include "bergbep/bep.hpp"
#include "bergbep/bergman.hpp"
#include "bergbep/fbep.hpp"
#include "bergbep/vekua.hpp"

using namespace bergbep;

static void BM_Teodorescu(benchmark::State& state) {
  const int rings = static_cast<int>(state.range(0));
  const GridPtr g = build_grid(rings, 2 * rings);
  const GridFunction w = GridFunction::sample(g, [](Complex z) { return std::exp(z.real()) * std::conj(z); });
  const auto op = TeodorescuOperator::for_grid(g);
  for (auto _ : state) benchmark::DoNotOptimize(op->apply(w));
}
BENCHMARK(BM_Teodorescu)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_SectorSpectrum(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(spectrum(gram(Region::sector(1.0), n)));
}
BENCHMARK(BM_SectorSpectrum)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMicrosecond);

namespace {

BepProblem sample_problem(int degree) {
  const GridPtr g = build_grid(24, 4 * degree + 8, {0.5});
  const GridFunction hK = GridFunction::sample(g, [](Complex z) { return Complex(std::norm(z)) + std::conj(z); });
  const GridFunction hJ = GridFunction::constant(g, -1.0);
  return BepProblem::make(Region::radial_disc(0.5), hK, hJ, 0.2, degree);
}

}  // namespace

static void BM_SolveBep(benchmark::State& state) {
  const BepProblem p = sample_problem(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_bep(p));
}
BENCHMARK(BM_SolveBep)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_SolveBepOracle(benchmark::State& state) {
  const BepProblem p = sample_problem(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_bep_oracle(p));
}
BENCHMARK(BM_SolveBepOracle)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_VekuaLift(benchmark::State& state) {
  const GridPtr g = build_grid(32, 64);
  const GridFunction alpha = alpha_from_f(Conductivity::exp_x(g, 0.1));
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(vekua_lift(AnalyticCoeffs::unit(n, 8), alpha, 1e-12, 200));
}
BENCHMARK(BM_VekuaLift)->Arg(0)->Arg(8)->Unit(benchmark::kMillisecond);

static void BM_FbepSpace(benchmark::State& state) {
  const GridPtr g = build_grid(32, 64);
  const Conductivity f = Conductivity::exp_x(g, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(build_fbep_space(f, static_cast<int>(state.range(0)), 1e-12));
}
BENCHMARK(BM_FbepSpace)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
