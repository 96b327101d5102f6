#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <mfswitch/error.hpp>
#include <mfswitch/limit.hpp>

using namespace mfswitch;

namespace {

GeneratorMatrix sym2() {
  Eigen::MatrixXd m(2, 2);
  m << -1, 1, 1, -1;
  return validate_generator(m);
}

ModelPtr switching_model() { return make_mean_reverting({1, {1, 2}, {}, {0.5, -0.5}, {0.5, 1}}); }

double deterministic_residual(double dt) {
  const auto m = make_mean_reverting({1, {1.0}, {0.5}, {0.3}, {0.0}});
  SimConfig c;
  c.model = m;
  c.particles = 8;
  c.dt = dt;
  c.horizon = 1.0;
  c.initial.kind = InitialCondition::Kind::Uniform;
  const auto f = bump_function(1, {0.2}, 3.0);
  const GeneratorMatrix q;  // the accumulator keeps a reference
  MartingaleAccumulator acc(*m, q, f);
  (void)simulate(c, SwitchingPath::constant(1.0, 0), 4, &acc);
  return std::abs(acc.residual());
}

}  // namespace

TEST_CASE("reference floor", "[limit]") {
  SimConfig c;
  c.model = switching_model();
  c.particles = 100;
  try {
    (void)conditional_law_reference(c, SwitchingPath::constant(1.0, 0), 1);
    FAIL("expected RefTooSmall");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::RefTooSmall);
  }
  CHECK(conditional_law_reference(c, SwitchingPath::constant(1.0, 0), 1, 50) ==
        frozen_regime_mckean_vlasov(c, 0, 1));
}

TEST_CASE("residual without noise is quadrature error", "[limit]") {
  const double ratio = deterministic_residual(0.02) / deterministic_residual(0.01);
  CHECK(ratio >= 1.6);
  CHECK(ratio <= 2.4);
}

TEST_CASE("offline residual matches the online accumulator", "[limit]") {
  const auto m = switching_model();
  const auto q = sym2();
  SimConfig c;
  c.model = m;
  c.particles = 32;
  c.dt = 0.01;
  c.record_every_step = true;
  const SwitchingPath path(1.0, {0.305, 0.61}, {0, 1, 0});
  const auto f = bump_function(1, {0.0, 0.5}, 2.0);
  MartingaleAccumulator acc(*m, q, f);
  const auto rec = simulate(c, path, 9, &acc);
  CHECK(martingale_residual(rec, path, q, *m, f, 1.0) == Catch::Approx(acc.residual()).margin(1e-12));
  CHECK(quadratic_variation_estimate(rec, path, *m, f, 1.0) ==
        Catch::Approx(acc.quadratic_variation()).margin(1e-14));
  const auto report = martingale_residual_report(rec, path, q, *m, f);
  CHECK(report.times.size() == rec.snapshots.size());
  CHECK(report.residuals.back() == Catch::Approx(acc.residual()).margin(1e-12));

  CHECK_THROWS_AS(martingale_residual(rec, path, q, *m, f, 0.123), Error);
  c.record_every_step = false;
  const auto sparse = simulate(c, path, 9);
  try {
    (void)martingale_residual(sparse, path, q, *m, f, 1.0);
    FAIL("expected CheckpointMissing");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::CheckpointMissing);
  }
}

TEST_CASE("martingale residual is centred and scales like 1/N", "[limit]") {
  const auto m = switching_model();
  const auto q = sym2();
  const auto f = bump_function(1, {0.0, 0.5}, 2.0);
  auto run = [&](std::size_t n, std::size_t reps, std::vector<double>& res, std::vector<double>& qv) {
    SimConfig c;
    c.model = m;
    c.particles = n;
    c.dt = 0.01;
    for (std::size_t r = 0; r < reps; ++r) {
      MartingaleAccumulator acc(*m, q, f);
      (void)simulate_with_chain(c, q, 0, {derive_seed(5, r, "chain"), derive_seed(5, r, "particles-" + std::to_string(n))}, &acc);
      res.push_back(acc.residual());
      qv.push_back(acc.quadratic_variation());
    }
  };
  std::vector<double> r256, q256, r1024, q1024;
  run(256, 200, r256, q256);
  run(1024, 50, r1024, q1024);
  const auto s = summarize(r256);
  CHECK(std::abs(s.mean) <= 3 * s.se);
  const double ratio = summarize(q256).mean / summarize(q1024).mean;
  CHECK(ratio == Catch::Approx(4.0).epsilon(0.3));
}

TEST_CASE("Ornstein-Uhlenbeck reference reaches its stationary variance", "[limit]") {
  const auto ou = make_mean_reverting({1, {0.0}, {1.0}, {}, {std::sqrt(2.0)}});
  SimConfig c;
  c.model = ou;
  c.particles = 8192;
  c.dt = 0.01;
  c.horizon = 6.0;
  c.initial.kind = InitialCondition::Kind::Points;
  c.initial.points = {0.0};
  const auto rec = conditional_law_reference(c, SwitchingPath::constant(6.0, 0), 3);
  const double v = moment(rec.snapshots.back().measure, MomentKind::Psi);
  // Euler variance 2 / (2 - dt) times (1 - e^{-12}); sd of the estimate ~ sqrt(2 / 8192)
  CHECK(v == Catch::Approx(2.0 / 1.99).margin(4 * std::sqrt(2.0 / 8192)));
}

TEST_CASE("coupled LLN replica", "[limit]") {
  LlnSpec spec;
  spec.base.model = switching_model();
  spec.base.dt = 0.01;
  spec.q = sym2();
  spec.sizes = {16, 64, 256};
  spec.reference = 256;
  spec.reference_floor = 256;
  spec.seed = 3;
  spec.moment_times = {0.0, 1.0};
  const auto a = lln_replica(spec, 0);
  CHECK(a.distances.size() == 3);
  CHECK(a.distances[2] == 0.0);  // same size as the reference: same run
  CHECK(a.distances[0] > 0.0);
  CHECK(a.moments.size() == 4);
  const auto b = lln_replica(spec, 0);
  CHECK(a.distances == b.distances);

  spec.reference = 128;
  CHECK_THROWS_AS(spec.validate(), Error);
}
