// Microbenchmarks for the hot kernels: quotient reduction, rank computation,
// characteristic polynomials, and local-ring diagonalization.

#include <benchmark/benchmark.h>

#include <random>

#include "towerlab/chain_complex.hpp"
#include "towerlab/local_ring.hpp"
#include "towerlab/spectral.hpp"

using namespace towerlab;

namespace {

FiniteQuotient z_mod(long m) {
  FiniteQuotient q;
  q.order = m;
  Perm shift(m);
  for (long i = 0; i < m; ++i) shift[i] = static_cast<int>((i + 1) % m);
  q.generator_images = {shift};
  q.label = "Z/" + std::to_string(m);
  return q;
}

FiniteQuotient wedge_quotient(int d, long p, int level) {
  Tower t = make_builtin_tower(GroupModelSpec::free_group(d), TowerFamily::abelianized, p, level);
  return t.levels.back();
}

}  // namespace

static void BM_ReduceWedgeBoundary(benchmark::State& state) {
  ChainComplexSpec spec = wedge_complex(2);
  FiniteQuotient q = wedge_quotient(2, 2, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    FlatMatrix m = reduce_matrix(spec.boundaries[0], q, CoefficientRing::Q());
    benchmark::DoNotOptimize(m);
  }
  state.SetLabel("order " + std::to_string(q.order));
}
BENCHMARK(BM_ReduceWedgeBoundary)->DenseRange(2, 4);

static void BM_RankModPrime(benchmark::State& state) {
  ChainComplexSpec spec = wedge_complex(2);
  FiniteQuotient q = wedge_quotient(2, 2, static_cast<int>(state.range(0)));
  FlatMatrix m = reduce_matrix(spec.boundaries[0], q, CoefficientRing::Z());
  for (auto _ : state) benchmark::DoNotOptimize(rank_mod_prime(m, 65537));
  state.SetLabel("order " + std::to_string(q.order));
}
BENCHMARK(BM_RankModPrime)->DenseRange(2, 4);

static void BM_RankOverQ(benchmark::State& state) {
  ChainComplexSpec spec = torus_complex(2);
  Tower t = make_builtin_tower(GroupModelSpec::free_abelian(2), TowerFamily::congruence, 2,
                               static_cast<int>(state.range(0)));
  FlatMatrix m = reduce_matrix(spec.boundaries[0], t.levels.back(), CoefficientRing::Q());
  std::mt19937_64 rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(rank_over_Q(m, rng));
  state.SetLabel("order " + std::to_string(t.levels.back().order));
}
BENCHMARK(BM_RankOverQ)->DenseRange(2, 3);

static void BM_CharPolyHessenberg(benchmark::State& state) {
  GroupRingMatrix delta = complex_laplacian(circle_complex(), 1);
  FlatMatrix m = reduce_matrix(delta, z_mod(state.range(0)), CoefficientRing::Z());
  for (auto _ : state) benchmark::DoNotOptimize(char_poly_hessenberg(m));
}
BENCHMARK(BM_CharPolyHessenberg)->Arg(16)->Arg(32)->Arg(64);

static void BM_LocalDiagonalize(benchmark::State& state) {
  int p = static_cast<int>(state.range(0));
  long n = state.range(1);
  std::mt19937_64 rng(2);
  LocalMat m = LocalMat::zero(p, n, n);
  for (long r = 0; r < n; ++r)
    for (long c = 0; c < n; ++c) {
      LocalPoly f(p);
      for (int i = 0; i < p; ++i) f.set_coeff(i, static_cast<long>(rng() % p));
      m.at(r, c) = f;
    }
  for (auto _ : state) benchmark::DoNotOptimize(local_diagonalize(m));
}
BENCHMARK(BM_LocalDiagonalize)->Args({2, 32})->Args({3, 16})->Args({5, 8});

BENCHMARK_MAIN();
