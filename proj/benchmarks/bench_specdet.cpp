#include <benchmark/benchmark.h>

#include "specdet/airy.hpp"
#include "specdet/determinants.hpp"
#include "specdet/spectrum.hpp"

using namespace specdet;

static void BM_AiryEval(benchmark::State& state) {
  const cplx t(-6.5, 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(airy_eval(t));
}
BENCHMARK(BM_AiryEval);

static void BM_JostSolution(benchmark::State& state) {
  const Potential pot = Potential::linear();
  for (auto _ : state) benchmark::DoNotOptimize(jost_solution(pot, cplx(-1.0, 0.5), {1e-12, 1e-14}));
}
BENCHMARK(BM_JostSolution)->Unit(benchmark::kMicrosecond);

static void BM_JostWithZDerivative(benchmark::State& state) {
  const Potential pot = Potential::quadratic();
  for (auto _ : state) benchmark::DoNotOptimize(jost_solution_with_zderiv(pot, cplx(2.0, 1.0), {1e-12, 1e-14}));
}
BENCHMARK(BM_JostWithZDerivative)->Unit(benchmark::kMicrosecond);

static void BM_FindEigenvalues(benchmark::State& state) {
  const Potential pot = Potential::linear();
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(find_eigenvalues(pot, BoundaryCondition(0.0), n));
}
BENCHMARK(BM_FindEigenvalues)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

static void BM_TraceClosed(benchmark::State& state) {
  const Potential pot = Potential::linear();
  for (auto _ : state) benchmark::DoNotOptimize(trace_closed(pot, BoundaryCondition(0.7), cplx(-1.0, 0.5), 0.0, 1.0));
}
BENCHMARK(BM_TraceClosed)->Unit(benchmark::kMicrosecond);

static void BM_Det2Closed(benchmark::State& state) {
  const Potential pot = Potential::quadratic();
  for (auto _ : state) benchmark::DoNotOptimize(det2_closed(pot, BoundaryCondition(0.0), cplx(-1.0, 0.5), 0.0, 1.0));
}
BENCHMARK(BM_Det2Closed)->Unit(benchmark::kMillisecond);

static void BM_TraceGreenDiagonal(benchmark::State& state) {
  const Potential pot = Potential::linear();
  for (auto _ : state) benchmark::DoNotOptimize(trace_green_diag(pot, BoundaryCondition(0.0), -1.0, 0.0));
}
BENCHMARK(BM_TraceGreenDiagonal)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
