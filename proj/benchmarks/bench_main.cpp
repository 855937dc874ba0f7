#include <benchmark/benchmark.h>

#include <otecon/entropic.hpp>
#include <otecon/games.hpp>
#include <otecon/linprog.hpp>
#include <otecon/otexact.hpp>
#include <otecon/rng.hpp>

using namespace otecon;

namespace {

Matrix random_matrix(SplitMix64& rng, int n, int m) {
  Matrix out(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) out(i, j) = rng.uniform(-1.0, 1.0);
  return out;
}

Vector random_simplex(SplitMix64& rng, int n) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = 0.05 + rng.uniform01();
  return v / v.sum();
}

void BM_SolveExactFlow(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  SplitMix64 rng(11);
  auto p = DiscreteMeasure::from_weights(random_simplex(rng, n));
  auto q = DiscreteMeasure::from_weights(random_simplex(rng, n));
  SurplusMatrix phi(random_matrix(rng, n, n));
  for (auto _ : state) {
    auto sol = solve_exact(p, q, phi);
    benchmark::DoNotOptimize(sol.value);
  }
}
BENCHMARK(BM_SolveExactFlow)->Arg(10)->Arg(40)->Arg(160)->Unit(benchmark::kMicrosecond);

void BM_SimplexTransportation(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  SplitMix64 rng(13);
  Vector p = random_simplex(rng, n), q = random_simplex(rng, n);
  Matrix phi = random_matrix(rng, n, n);
  LinearProgram lp;
  lp.objective = Vector(n * n);
  lp.constraints = Matrix::Zero(2 * n, n * n);
  lp.rhs = Vector(2 * n);
  lp.sense.assign(2 * n, RowSense::Equal);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) {
      lp.objective[x * n + y] = phi(x, y);
      lp.constraints(x, x * n + y) = 1.0;
      lp.constraints(n + y, x * n + y) = 1.0;
    }
  lp.rhs.head(n) = p;
  lp.rhs.tail(n) = q;
  for (auto _ : state) {
    auto sol = solve_lp(lp);
    benchmark::DoNotOptimize(sol.objective_value);
  }
}
BENCHMARK(BM_SimplexTransportation)->Arg(5)->Arg(10)->Arg(20)->Unit(benchmark::kMicrosecond);

void BM_IpfpSweeps(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const double sigma = state.range(1) / 100.0;
  SplitMix64 rng(17);
  auto p = DiscreteMeasure::from_weights(random_simplex(rng, n));
  auto q = DiscreteMeasure::from_weights(random_simplex(rng, n));
  SurplusMatrix phi(random_matrix(rng, n, n));
  EntropicConfig cfg;
  cfg.sigma = sigma;
  cfg.marginal_tol = 1e-9;
  for (auto _ : state) {
    auto res = ipfp_solve(p, q, phi, cfg);
    benchmark::DoNotOptimize(res.iterations);
  }
}
BENCHMARK(BM_IpfpSweeps)
    ->Args({20, 100})
    ->Args({20, 10})
    ->Args({100, 100})
    ->Args({100, 10})
    ->Unit(benchmark::kMicrosecond);

void BM_HideAndSeek(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  SplitMix64 rng(19);
  Matrix payoff(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) payoff(i, j) = rng.uniform(0.5, 3.0);
  HideSeekGame game(payoff);
  for (auto _ : state) {
    auto sol = hide_and_seek_solve(game);
    benchmark::DoNotOptimize(sol.game_value);
  }
}
BENCHMARK(BM_HideAndSeek)->Arg(3)->Arg(6)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
