#include <random>

#include <benchmark/benchmark.h>

#include "lqgopt/bench.h"

namespace lqgopt {
namespace {

Matrix Gaussian(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix M(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) M(i, j) = normal(rng);
  }
  return M;
}

Matrix Hurwitz(int k, Rng& rng) {
  const Matrix A = Gaussian(k, k, rng);
  return A - (SpectralAbscissa(A) + 0.5) * Matrix::Identity(k, k);
}

struct Instance {
  Plant plant;
  Controller K;
};

Instance MakeInstance(int n) {
  Rng rng = FamilyRng(11, n);
  Plant plant = GenerateRandomPlant(n, 3, 3, 0.8, rng);
  Controller K = RandomMinimalInit(plant, rng);
  return {std::move(plant), std::move(K)};
}

void BM_LyapunovKronecker(benchmark::State& state) {
  Rng rng(1);
  const int k = static_cast<int>(state.range(0));
  const Matrix A = Hurwitz(k, rng);
  const Matrix Q = Matrix::Identity(k, k);
  for (auto _ : state) benchmark::DoNotOptimize(SolveLyapunovKronecker(A, Q));
}
BENCHMARK(BM_LyapunovKronecker)->Arg(4)->Arg(8)->Arg(16)->Arg(20);

void BM_LyapunovSchur(benchmark::State& state) {
  Rng rng(1);
  const int k = static_cast<int>(state.range(0));
  const Matrix A = Hurwitz(k, rng);
  const Matrix Q = Matrix::Identity(k, k);
  for (auto _ : state) benchmark::DoNotOptimize(SolveLyapunovSchur(A, Q));
}
BENCHMARK(BM_LyapunovSchur)->Arg(4)->Arg(8)->Arg(16)->Arg(20)->Arg(40);

void BM_EuclideanGradient(benchmark::State& state) {
  const Instance inst = MakeInstance(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(EuclideanGradient(inst.plant, inst.K));
}
BENCHMARK(BM_EuclideanGradient)->Arg(2)->Arg(4)->Arg(6);

void BM_RiemannianGradient(benchmark::State& state) {
  const Instance inst = MakeInstance(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(RiemannianGradient(inst.plant, inst.K, {1, 1, 1}));
  }
}
BENCHMARK(BM_RiemannianGradient)->Arg(2)->Arg(4)->Arg(6);

void BM_GramMatrix(benchmark::State& state) {
  const Instance inst = MakeInstance(static_cast<int>(state.range(0)));
  const TangentBasis basis(inst.K.order(), inst.plant.m(), inst.plant.p());
  for (auto _ : state) {
    benchmark::DoNotOptimize(MetricGramMatrix(inst.plant, inst.K, {1, 1, 1}, basis));
  }
}
BENCHMARK(BM_GramMatrix)->Arg(2)->Arg(4)->Arg(6);

void BM_RiccatiOptimum(benchmark::State& state) {
  const Instance inst = MakeInstance(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(LqgRiccatiOptimum(inst.plant));
}
BENCHMARK(BM_RiccatiOptimum)->Arg(4)->Arg(6);

}  // namespace
}  // namespace lqgopt

BENCHMARK_MAIN();
