#include <cmath>

#include <benchmark/benchmark.h>

#include "nlsis/dynamics.hpp"
#include "nlsis/equilibria.hpp"
#include "nlsis/spectral.hpp"
#include "nlsis/suite.hpp"

using namespace nlsis;

namespace {

RateFields cosine_rates(const Mesh& m) {
  return make_rates(m, (1.0 + 0.8 * (M_PI * m.nodes().array()).cos()).matrix(), Field::Ones(m.size()));
}

ModelParams cosine_model(int n, double d_S, double d_I) {
  ModelParams p;
  p.kernel = standard_kernel(n);
  p.rates = cosine_rates(p.kernel->mesh());
  p.d_S = d_S;
  p.d_I = d_I;
  p.N = 2.0;
  return p;
}

void BM_LambdaP(benchmark::State& state) {
  const auto k = standard_kernel(static_cast<int>(state.range(0)));
  const RateFields r = cosine_rates(k->mesh());
  for (auto _ : state) benchmark::DoNotOptimize(lambda_p_value(*k, 0.1, r));
}
BENCHMARK(BM_LambdaP)->Arg(200)->Arg(400)->Arg(800)->Unit(benchmark::kMillisecond);

void BM_R0AllRoutes(benchmark::State& state) {
  const auto k = standard_kernel(static_cast<int>(state.range(0)));
  const RateFields r = cosine_rates(k->mesh());
  for (auto _ : state) benchmark::DoNotOptimize(r0_all_routes(*k, 0.1, r));
}
BENCHMARK(BM_R0AllRoutes)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_Rhs(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ModelParams p = cosine_model(n, 1.0, 1.0);
  const State s{Field::Constant(n, 0.6), Field::Constant(n, 0.4), 0.0};
  for (auto _ : state) benchmark::DoNotOptimize(rhs(p, s));
}
BENCHMARK(BM_Rhs)->Arg(400)->Arg(800)->Unit(benchmark::kMicrosecond);

void BM_ReducedSolve(benchmark::State& state) {
  const ModelParams p = cosine_model(400, 0.1, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(solve_reduced_I(p));
}
BENCHMARK(BM_ReducedSolve)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
