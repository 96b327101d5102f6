#include <benchmark/benchmark.h>

#include <mfswitch/measure.hpp>
#include <mfswitch/random.hpp>

using namespace mfswitch;

namespace {

EmpiricalMeasure gaussian_cloud(std::size_t dim, std::size_t n, double shift, std::uint64_t seed) {
  RandomStream rng(seed);
  std::vector<double> x(n * dim);
  for (double& v : x) v = shift + rng.normal();
  return EmpiricalMeasure::uniform(dim, std::move(x));
}

void BM_BlChain1d(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  auto mu = gaussian_cloud(1, n, 0.0, 1);
  auto eta = gaussian_cloud(1, n, 0.3, 2);
  BlOptions opt;
  opt.method = BlMethod::Chain1d;
  for (auto _ : state) benchmark::DoNotOptimize(bl_distance_exact(mu, eta, opt));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BlChain1d)->RangeMultiplier(4)->Range(64, 16384)->Complexity();

void BM_BlSimplex(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto dim = static_cast<std::size_t>(state.range(1));
  auto mu = gaussian_cloud(dim, n, 0.0, 3);
  auto eta = gaussian_cloud(dim, n, 0.3, 4);
  BlOptions opt;
  opt.method = BlMethod::Simplex;
  for (auto _ : state) benchmark::DoNotOptimize(bl_distance_exact(mu, eta, opt));
}
BENCHMARK(BM_BlSimplex)->ArgsProduct({{16, 64, 256}, {1, 2}})->Unit(benchmark::kMillisecond);

void BM_BlApprox(benchmark::State& state) {
  auto mu = gaussian_cloud(2, 1024, 0.0, 5);
  auto eta = gaussian_cloud(2, 1024, 0.3, 6);
  const auto budget = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(bl_distance_approx(mu, eta, budget).value);
}
BENCHMARK(BM_BlApprox)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace
