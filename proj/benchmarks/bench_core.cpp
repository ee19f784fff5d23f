#include <benchmark/benchmark.h>

#include <random>

#include "projdyn/abweights.hpp"
#include "projdyn/flagdyn.hpp"
#include "projdyn/hilbert.hpp"
#include "projdyn/peripheral.hpp"
#include "projdyn/sympow.hpp"

using namespace projdyn;

namespace {

MatQ random_rational(int d, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> num(-3, 3), den(1, 3);
  while (true) {
    MatQ m(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) m(i, j) = Rational(num(rng), den(rng));
    if (determinant(m) != 0) return m;
  }
}

MatQ diag_q(std::vector<Rational> xs) {
  MatQ m = MatQ::Zero(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = xs[i];
  return m;
}

AbelianRep cusp() {
  return AbelianRep::exact({diag_q({2, Rational(1, 2), 1, 1}), diag_q({1, 2, Rational(1, 2), 1})});
}

}  // namespace

static void BM_SymPowerExact(benchmark::State& state) {
  std::mt19937_64 rng(1);
  MatQ g = random_rational(static_cast<int>(state.range(0)), rng);
  for (auto _ : state) benchmark::DoNotOptimize(sym_power_matrix(g, static_cast<int>(state.range(1))));
}
BENCHMARK(BM_SymPowerExact)->Args({3, 2})->Args({4, 2})->Args({4, 3});

static void BM_SymPowerFloat(benchmark::State& state) {
  std::mt19937_64 rng(1);
  MatD g = to_double(random_rational(static_cast<int>(state.range(0)), rng));
  for (auto _ : state) benchmark::DoNotOptimize(sym_power_matrix(g, static_cast<int>(state.range(1))));
}
BENCHMARK(BM_SymPowerFloat)->Args({4, 2})->Args({4, 4})->Args({6, 3});

static void BM_DecomposeCuspSquare(benchmark::State& state) {
  AbelianRep rep = sym_power_rep(cusp(), 2);
  for (auto _ : state) benchmark::DoNotOptimize(decompose(rep, Rational(2)));
}
BENCHMARK(BM_DecomposeCuspSquare)->Unit(benchmark::kMillisecond);

static void BM_BuildSimplices(benchmark::State& state) {
  AbelianRep rep = cusp();
  std::vector<VecQ> hints;
  for (int i = 0; i < 3; ++i) hints.push_back(VecQ::Unit(4, i));
  PeripheralModel model = build_model(rep, hints, Rational(2));
  for (auto _ : state) benchmark::DoNotOptimize(build_simplices(model, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_BuildSimplices)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

static void BM_HilbertDistance(benchmark::State& state) {
  std::vector<VecQ> verts;
  for (int i = 0; i < 4; ++i) verts.push_back(VecQ::Unit(4, i));
  ConvexDomain dom = ConvexDomain::polytope_v(verts);
  VecD x(4), y(4);
  x << 1, 2, 3, 4;
  y << 4, 1, 2, 3;
  ProjectivePoint<double> px(x), py(y);
  for (auto _ : state) benchmark::DoNotOptimize(hilbert_distance(dom, px, py));
}
BENCHMARK(BM_HilbertDistance);

static void BM_OrbitWords(benchmark::State& state) {
  MatD a(2, 2), b(2, 2);
  a << 3, 0, 0, 1.0 / 3;
  b << 5.0 / 3, 4.0 / 3, 4.0 / 3, 5.0 / 3;
  std::vector<MatD> gens{a, a.inverse(), b, b.inverse()};
  for (auto _ : state) benchmark::DoNotOptimize(orbit_limit_flags(gens, static_cast<int>(state.range(0)), 1));
}
BENCHMARK(BM_OrbitWords)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
