#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <mfswitch/aggregation.hpp>
#include <mfswitch/error.hpp>
#include <mfswitch/stats.hpp>

using namespace mfswitch;

namespace {

GeneratorMatrix two(double r) {
  Eigen::MatrixXd m(2, 2);
  m << -r, r, r, -r;
  return validate_generator(m);
}

Eigen::MatrixXd slow_example() {
  Eigen::MatrixXd s(4, 4);
  s << -1, 0, 1, 0, 0, -1, 0, 1, 1, 0, -1, 0, 0, 1, 0, -1;
  return s;
}

}  // namespace

TEST_CASE("partition indexing", "[aggregation]") {
  const Partition p({2, 3});
  CHECK(p.states() == 5);
  CHECK(p.block_of(3) == 1);
  CHECK(p.index_in_block(3) == 1);
  CHECK(p.flat(1, 2) == 4);
  CHECK(p.offset(1) == 2);
  CHECK(Partition::identity(3).blocks() == 3);
}

TEST_CASE("fast generator of the worked example", "[aggregation]") {
  const TwoScaleSpec spec({two(1), two(2)}, slow_example(), 0.1);
  const auto q = build_fast_generator(spec);
  CHECK(q.rate(0, 1) == Catch::Approx(10.0));
  CHECK(q.rate(0, 2) == Catch::Approx(1.0));
  CHECK(q.rate(2, 3) == Catch::Approx(20.0));
  CHECK(q.rate(0, 0) == Catch::Approx(-11.0));
}

TEST_CASE("aggregated generator", "[aggregation]") {
  const TwoScaleSpec spec({two(1), two(2)}, slow_example(), 0.1);
  const auto agg = aggregate(spec);
  Eigen::MatrixXd want(2, 2);
  want << -1, 1, 1, -1;
  CHECK((agg.q_bar.rates() - want).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(agg.weight(0) == Catch::Approx(0.5));
  CHECK(agg.nu_tilde.rows() == 2);
  CHECK(agg.nu_tilde.cols() == 4);

  const TwoScaleSpec zero({two(1), two(2)}, Eigen::MatrixXd::Zero(4, 4), 0.1);
  CHECK(aggregate(zero).q_bar.rates().cwiseAbs().maxCoeff() == 0.0);

  Eigen::MatrixXd q3(3, 3);
  q3 << -1, 1, 0, 0, -1, 1, 1, 0, -1;
  const TwoScaleSpec single({validate_generator(q3)}, Eigen::MatrixXd::Zero(3, 3), 0.5);
  const auto one = aggregate(single);
  CHECK(one.q_bar.size() == 1);
  CHECK(one.q_bar.rate(0, 0) == 0.0);
}

TEST_CASE("two-scale spec validation", "[aggregation]") {
  CHECK_THROWS_AS(TwoScaleSpec({two(1)}, Eigen::MatrixXd::Zero(3, 3), 0.1), Error);
  CHECK_THROWS_AS(TwoScaleSpec({two(1)}, Eigen::MatrixXd::Zero(2, 2), 0.0), Error);
  Eigen::MatrixXd bad(2, 2);
  bad << 0, 1, 0, 0;
  CHECK_THROWS_AS(TwoScaleSpec({two(1)}, bad, 0.1), Error);
  // Qhat may be negative off the diagonal as long as Q^eps stays a generator
  Eigen::MatrixXd hat(4, 4);
  hat << -1, -5, 6, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0;
  const TwoScaleSpec big({two(1), two(1)}, hat, 1.0);
  try {
    (void)build_fast_generator(big);
    FAIL("expected InvalidCombination");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidCombination);
  }
  CHECK(build_fast_generator(big.with_epsilon(0.1)).rate(0, 1) == Catch::Approx(5.0));
}

TEST_CASE("project_path lumps and merges", "[aggregation]") {
  const Partition p({2, 2});
  const SwitchingPath fast(2.0, {0.3, 0.7, 1.1}, {0, 1, 2, 3});
  const auto agg = project_path(fast, p);
  REQUIRE(agg.jump_count() == 1);
  CHECK(agg.jump_times()[0] == 0.7);
  CHECK(agg.states()[1] == 1);
  CHECK_THROWS_AS(project_path(SwitchingPath(1.0, {0.5}, {0, 5}), p), Error);
}

TEST_CASE("occupation residual by hand and its decay", "[aggregation]") {
  const TwoScaleSpec spec({two(1), two(2)}, slow_example(), 0.1);
  const auto agg = aggregate(spec);
  const SwitchingPath fast(2.0, {0.5}, {0, 1});
  const auto lumped = project_path(fast, spec.partition());
  // state 0 for 0.5, block 0 for 2 with nu = 1/2
  CHECK(occupation_residual(fast, lumped, agg, 0, 2.0) == Catch::Approx(0.5 - 1.0));
  CHECK_THROWS_AS(occupation_residual(fast, SwitchingPath::constant(2.0, 1), agg, 0, 2.0), Error);

  std::vector<double> eps{0.1, 0.01, 0.001}, means;
  for (double e : eps) {
    const auto q = build_fast_generator(spec.with_epsilon(e));
    RandomStream rng(derive_seed(4, 0, "occ"));
    std::vector<double> v;
    for (int k = 0; k < 200; ++k) {
      const auto path = sample_path(q, 0, 1.0, rng);
      v.push_back(std::abs(occupation_residual(path, project_path(path, spec.partition()), agg, 0, 1.0)));
    }
    means.push_back(summarize(v).mean);
  }
  CHECK(means[0] > means[1]);
  CHECK(means[1] > means[2]);
  const auto fit = fit_rate(eps, means);
  CHECK(fit.slope >= 0.3);
  CHECK(fit.slope <= 0.7);
}
