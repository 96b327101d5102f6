#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <mfswitch/error.hpp>
#include <mfswitch/stats.hpp>
#include <mfswitch/twoscale.hpp>

using namespace mfswitch;

namespace {

GeneratorMatrix two(double r) {
  Eigen::MatrixXd m(2, 2);
  m << -r, r, r, -r;
  return validate_generator(m);
}

Eigen::MatrixXd cross_slow() {
  Eigen::MatrixXd s(4, 4);
  s << -1, 0, 1, 0, 0, -1, 0, 1, 1, 0, -1, 0, 0, 1, 0, -1;
  return s;
}

}  // namespace

TEST_CASE("a is averaged, not sigma", "[twoscale]") {
  const auto base = make_mean_reverting({1, {0, 0}, {}, {}, {1, 2}});
  const TwoScaleSpec spec({two(1)}, Eigen::MatrixXd::Zero(2, 2), 0.1);
  const auto agg = aggregate(spec);
  const auto avg = average_coefficients(base, agg);
  const auto mu = EmpiricalMeasure::uniform(1, {0.0});
  const auto v = view_of(mu);
  const double x = 0.3;
  double a = 0, s = 0;
  avg->diffusion_squared({&x, 1}, v, 0, {&a, 1});
  avg->diffusion({&x, 1}, v, 0, {&s, 1});
  CHECK(a == Catch::Approx(2.5));
  CHECK(s == Catch::Approx(std::sqrt(2.5)));
  const auto control = sigma_averaged_model(base, agg);
  control->diffusion({&x, 1}, v, 0, {&s, 1});
  CHECK(s == Catch::Approx(1.5));
  CHECK(avg->regimes() == 1);
  CHECK_THROWS_AS(average_coefficients(make_mean_reverting({1, {0}, {}, {}, {1}}), agg), Error);
}

TEST_CASE("matrix square root", "[twoscale]") {
  RandomStream rng(6);
  for (int k = 0; k < 20; ++k) {
    Eigen::MatrixXd a(3, 3);
    for (Eigen::Index i = 0; i < 9; ++i) a.data()[i] = rng.normal();
    const Eigen::MatrixXd spd = a * a.transpose();
    const auto s = matrix_sqrt_spd(spd);
    CHECK((s * s.transpose() - spd).cwiseAbs().maxCoeff() < 1e-10);
  }
  Eigen::MatrixXd rank1(2, 2);
  rank1 << 1, 1, 1, 1;
  const auto r = matrix_sqrt_spd(rank1);
  CHECK((r * r.transpose() - rank1).cwiseAbs().maxCoeff() < 1e-10);

  Eigen::MatrixXd asym(2, 2);
  asym << 1, 0.5, 0, 1;
  CHECK_THROWS_AS(matrix_sqrt_spd(asym), Error);
  Eigen::MatrixXd indef(2, 2);
  indef << 1, 0, 0, -1e-6;
  try {
    (void)matrix_sqrt_spd(indef);
    FAIL("expected IndefiniteBeyondTolerance");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IndefiniteBeyondTolerance);
  }
  Eigen::MatrixXd tiny(2, 2);
  tiny << 1, 0, 0, -1e-13;
  CHECK_NOTHROW(matrix_sqrt_spd(tiny));
}

TEST_CASE("operator residual vanishes for singleton blocks", "[twoscale]") {
  const auto base = make_mean_reverting({1, {1, 2}, {}, {0.5, -0.5}, {0.5, 1}});
  Eigen::MatrixXd slow(2, 2);
  slow << -1, 1, 1, -1;
  const TwoScaleSpec spec({GeneratorMatrix(), GeneratorMatrix()}, slow, 0.1);
  const auto agg = aggregate(spec);
  const auto avg = average_coefficients(base, agg);
  const auto q = build_fast_generator(spec);
  const auto f = bump_function(1, {0.0, 0.5}, 2.0);
  SimConfig c;
  c.model = base;
  c.particles = 32;
  c.dt = 0.01;
  c.record_every_step = true;
  OperatorResidualAccumulator acc(*base, *avg, q, agg.q_bar, f);
  const auto run = simulate_with_chain(c, q, 0, {1, 2}, &acc);
  CHECK(std::abs(acc.value()) < 1e-12);
  const auto lumped = project_path(run.path, agg.partition);
  CHECK(operator_residual(run.record, run.path, lumped, *base, *avg, q, agg.q_bar, f, 1.0) ==
        Catch::Approx(acc.value()).margin(1e-12));
}

TEST_CASE("offline operator residual and path checks", "[twoscale]") {
  const auto base = make_mean_reverting({1, {0.5, 0.5, 0.5, 0.5}, {}, {}, {0.5, 2, 1, 2}});
  const TwoScaleSpec spec({two(1), two(1)}, cross_slow(), 0.1);
  const auto agg = aggregate(spec);
  const auto avg = average_coefficients(base, agg);
  const auto q = build_fast_generator(spec);
  const auto f = psi_function(1);
  SimConfig c;
  c.model = base;
  c.particles = 16;
  c.dt = 0.005;
  c.record_every_step = true;
  OperatorResidualAccumulator acc(*base, *avg, q, agg.q_bar, f);
  const auto run = simulate_with_chain(c, q, 0, {3, 4}, &acc);
  const auto lumped = project_path(run.path, agg.partition);
  CHECK(operator_residual(run.record, run.path, lumped, *base, *avg, q, agg.q_bar, f, 1.0) ==
        Catch::Approx(acc.value()).margin(1e-10));
  try {
    (void)operator_residual(run.record, run.path, SwitchingPath::constant(1.0, 1), *base, *avg, q, agg.q_bar, f, 1.0);
    FAIL("expected PathMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::PathMismatch);
  }
}

TEST_CASE("operator residual decays with epsilon", "[twoscale]") {
  TwoScaleExperimentSpec spec;
  spec.chain = TwoScaleSpec({two(1), two(1)}, cross_slow(), 1.0);
  spec.model = make_mean_reverting({1, {0.5, 0.5, 0.5, 0.5}, {0.5, 0.5, 0.5, 0.5}, {}, {0.5, 2, 1, 2}});
  spec.particles = 16;
  spec.epsilons = {0.1, 0.01, 0.001};
  spec.replicas = 100;
  spec.control = false;
  spec.seed = 2;
  std::vector<std::vector<double>> res(3);
  for (std::size_t r = 0; r < spec.replicas; ++r) {
    const auto rep = two_scale_replica(spec, r);
    for (std::size_t k = 0; k < 3; ++k) res[k].push_back(std::abs(rep.operator_residual[k]));
  }
  CHECK(summarize(res[0]).mean > summarize(res[1]).mean);
  CHECK(summarize(res[1]).mean > summarize(res[2]).mean);
}

TEST_CASE("experiment spec validation", "[twoscale]") {
  TwoScaleExperimentSpec spec;
  spec.chain = TwoScaleSpec({two(1), two(1)}, cross_slow(), 1.0);
  spec.model = make_mean_reverting({1, {0.5, 0.5, 0.5, 0.5}, {}, {}, {0.5, 2, 1, 2}});
  spec.epsilons = {0.1, 0.01};
  CHECK_NOTHROW(spec.validate());
  CHECK(spec.fast_step(1) == Catch::Approx(1e-3));
  spec.fast_dt = {0.01, 0.01};  // 0.01 > 0.01 / 10
  CHECK_THROWS_AS(spec.validate(), Error);
  spec.fast_dt.clear();
  spec.epsilons = {0.01, 0.1};
  CHECK_THROWS_AS(spec.validate(), Error);
  spec.epsilons = {0.1};
  spec.model = make_mean_reverting({1, {0.5, 0.5}, {}, {}, {1, 1}});
  CHECK_THROWS_AS(spec.validate(), Error);
}
