#include <benchmark/benchmark.h>

#include <mfswitch/dynamics.hpp>
#include <mfswitch/models.hpp>
#include <mfswitch/random.hpp>

using namespace mfswitch;

namespace {

ModelPtr model_for(int which, std::size_t dim) {
  if (which == 0) {
    MeanRevertingParams p;
    p.dim = dim;
    p.interaction = {1.0, 2.0};
    p.noise = {0.5, 1.0};
    return make_mean_reverting(p);
  }
  KernelInteractionParams p;
  p.dim = dim;
  p.strength = {1.0, 0.5};
  p.noise = {0.5, 1.0};
  return make_kernel_interaction(p);
}

// arg 0: particles, arg 1: 0 mean-reverting / 1 kernel
void BM_EmStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto model = model_for(static_cast<int>(state.range(1)), 2);
  SimConfig cfg;
  cfg.model = model;
  cfg.particles = n;
  const ParticleEnsemble ens = initial_ensemble(cfg, 7);
  const EmpiricalMeasure mu = ens.measure();
  const ParticleNoise noise(11);
  std::uint64_t step = 0;
  for (auto _ : state) {
    auto next = em_step(*model, ens, mu, 1, 1e-3, noise, step++);
    benchmark::DoNotOptimize(next.x.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_EmStep)->ArgsProduct({{256, 1024, 4096}, {0}});
BENCHMARK(BM_EmStep)->ArgsProduct({{256, 1024}, {1}});

}  // namespace
