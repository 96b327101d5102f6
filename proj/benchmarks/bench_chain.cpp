#include <benchmark/benchmark.h>

#include <mfswitch/chain.hpp>
#include <mfswitch/random.hpp>

using namespace mfswitch;

namespace {

GeneratorMatrix ring(std::size_t m) {
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < m; ++i) {
    const auto a = static_cast<Eigen::Index>(i);
    const auto b = static_cast<Eigen::Index>((i + 1) % m);
    const auto c = static_cast<Eigen::Index>((i + m - 1) % m);
    q(a, b) += 1.0;
    q(a, c) += 0.5;
    q(a, a) -= 1.5;
    labels.push_back(std::to_string(i));
  }
  return validate_generator(q, labels);
}

void BM_SamplePath(benchmark::State& state) {
  const auto q = ring(3);
  const double horizon = static_cast<double>(state.range(0));
  RandomStream rng(42);
  for (auto _ : state) {
    auto p = sample_path(q, 0, horizon, rng);
    benchmark::DoNotOptimize(p);
  }
}
BENCHMARK(BM_SamplePath)->Arg(1)->Arg(10)->Arg(100);

void BM_TransitionMatrix(benchmark::State& state) {
  const auto q = ring(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto p = transition_matrix(q, 2.0);
    benchmark::DoNotOptimize(p.data());
  }
}
BENCHMARK(BM_TransitionMatrix)->Arg(2)->Arg(8)->Arg(32)->Arg(128);

}  // namespace
