#include "mfswitch/dynamics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>

#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>

#include "local_generator.hpp"
#include "mfswitch/error.hpp"

namespace mfswitch {
namespace {

constexpr double kGridTolerance = 1e-9;  // relative to dt

std::uint64_t initial_seed(std::uint64_t seed) { return mix64(seed ^ hash_label("initial-condition")); }
std::uint64_t noise_seed(std::uint64_t seed) { return mix64(seed ^ hash_label("particle-noise")); }

std::uint64_t stream_of(std::span<const std::uint64_t> ids, std::size_t k) {
  return ids.empty() ? static_cast<std::uint64_t>(k) : ids[k];
}

// x_out = x_in + b h + sigma sqrt(h) xi for every particle.
void advance_particles(const CoefficientModel& model, std::size_t dim, const std::vector<double>& in,
                       std::vector<double>& out, const MeasureView& view, int regime, double h,
                       const ParticleNoise& noise, std::uint64_t step, std::span<const std::uint64_t> ids) {
  const std::size_t n = in.size() / dim;
  const double root_h = std::sqrt(h);
  std::atomic<bool> blown{false};
  out.resize(in.size());
  tbb::parallel_for(tbb::blocked_range<std::size_t>(0, n, 256), [&](const tbb::blocked_range<std::size_t>& r) {
    std::vector<double> b(dim), s(dim * dim), xi(dim);
    for (std::size_t k = r.begin(); k != r.end(); ++k) {
      const std::span<const double> x(in.data() + k * dim, dim);
      model.drift(x, view, regime, b);
      model.diffusion(x, view, regime, s);
      noise.normals(stream_of(ids, k), step, xi);
      for (std::size_t i = 0; i < dim; ++i) {
        double dw = 0.0;
        for (std::size_t j = 0; j < dim; ++j) dw += s[i * dim + j] * xi[j];
        const double v = x[i] + b[i] * h + root_h * dw;
        if (!std::isfinite(v)) blown.store(true, std::memory_order_relaxed);
        out[k * dim + i] = v;
      }
    }
  });
  if (blown.load()) {
    std::ostringstream os;
    os << "non-finite particle state after step " << step << " in regime " << regime;
    throw Error(ErrorKind::NonFiniteState, os.str());
  }
}

struct Stop {
  double time;
  bool checkpoint;
};

// Substep ends in (t0, t_end]: the global grid k*dt, the path's jump times
// and the checkpoints, merged where they lie within the grid tolerance.
std::vector<Stop> plan_stops(double t0, double t_end, double dt, const SwitchingPath& path,
                             const std::vector<double>& checkpoints) {
  const double tol = kGridTolerance * dt;
  enum Rank { Grid = 0, Check = 1, End = 2, Jump = 3 };
  struct Candidate {
    double time;
    Rank rank;
  };
  std::vector<Candidate> c;
  for (auto k = static_cast<long long>(std::floor(t0 / dt + kGridTolerance)) + 1;; ++k) {
    const double g = static_cast<double>(k) * dt;
    if (g >= t_end - tol) break;
    c.push_back({g, Grid});
  }
  c.push_back({t_end, End});
  for (const double j : path.jump_times()) {
    if (j > t0 + tol && j < t_end - tol) c.push_back({j, Jump});
  }
  for (const double cp : checkpoints) {
    if (cp > t0 + tol && cp <= t_end + tol) c.push_back({cp, Check});
  }
  std::sort(c.begin(), c.end(), [](const Candidate& a, const Candidate& b) { return a.time < b.time; });

  std::vector<Stop> stops;
  for (std::size_t i = 0; i < c.size();) {
    std::size_t j = i;
    Candidate keep = c[i];
    bool is_check = false;
    while (j < c.size() && c[j].time - c[i].time <= tol) {
      if (c[j].rank > keep.rank) keep = c[j];
      is_check = is_check || c[j].rank == Check;
      ++j;
    }
    if (keep.rank == Check) {
      // A lone checkpoint near a grid point has already merged with it; an
      // off-grid checkpoint stays where it is.
      const double g = std::round(keep.time / dt) * dt;
      if (std::abs(g - keep.time) <= tol) keep.time = g;
    }
    stops.push_back({keep.time, is_check});
    i = j;
  }
  return stops;
}

class Engine {
 public:
  Engine(const SimConfig& config, std::uint64_t seed) : config_(config), noise_(noise_seed(seed)) {}

  // Integrates state to t_end along `path`; the observer sees the start
  // state only when `observe_start` is set.
  void run(SegmentState& state, double t_end, const SwitchingPath& path, StepObserver* observer,
           TrajectoryRecord* record, bool observe_start) {
    const CoefficientModel& model = *config_.model;
    auto& ens = state.ensemble;
    const double t0 = ens.time;
    const auto stops = plan_stops(t0, t_end, config_.dt, path, config_.checkpoints);
    const bool start_is_check = wants_start(t0);

    std::vector<double> next;
    EmpiricalMeasure mu = ens.measure();
    MeasureView view = view_of(mu);
    int regime = path.value_at(t0);
    check_regime(regime);
    ens.regime = regime;
    if (observe_start && observer != nullptr) observer->observe(t0, mu, view, regime);
    if (record != nullptr && observe_start && (config_.record_every_step || start_is_check)) {
      record->snapshots.push_back({t0, regime, mu});
    }

    for (const Stop& stop : stops) {
      const double h = stop.time - ens.time;
      advance_particles(model, ens.dim, ens.x, next, view, regime, h, noise_, state.step, config_.stream_ids);
      ens.x.swap(next);
      ens.time = stop.time;
      ++state.step;

      regime = path.value_at(stop.time);
      check_regime(regime);
      ens.regime = regime;
      mu = ens.measure();
      view = view_of(mu);
      if (observer != nullptr) observer->observe(stop.time, mu, view, regime);
      if (record != nullptr && (config_.record_every_step || stop.checkpoint)) {
        record->snapshots.push_back({stop.time, regime, mu});
      }
    }
  }

 private:
  bool wants_start(double t0) const {
    if (config_.checkpoints.empty()) return t0 == 0.0;
    const double tol = kGridTolerance * config_.dt;
    return std::any_of(config_.checkpoints.begin(), config_.checkpoints.end(),
                       [&](double c) { return std::abs(c - t0) <= tol; });
  }

  void check_regime(int regime) const {
    if (regime < 0 || static_cast<std::size_t>(regime) >= config_.model->regimes()) {
      throw Error(ErrorKind::UnknownState, "path visits regime " + std::to_string(regime) + " but " +
                                               config_.model->name() + " has " +
                                               std::to_string(config_.model->regimes()));
    }
  }

  const SimConfig& config_;
  ParticleNoise noise_;
};

SimConfig with_default_checkpoints(const SimConfig& config) {
  SimConfig c = config;
  if (c.checkpoints.empty()) c.checkpoints = {0.0, c.horizon};
  return c;
}

}  // namespace

void SimConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::ConfigInvalid, what); };
  if (!model) fail("simulation needs a coefficient model");
  if (particles == 0) fail("particle count must be at least 1");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) fail("horizon must be positive and finite");
  if (!(dt > 0.0) || !std::isfinite(dt)) fail("dt must be positive and finite");
  for (const double c : checkpoints) {
    if (!(c >= 0.0 && c <= horizon)) fail("checkpoints must lie in [0, T]");
  }
  if (!stream_ids.empty() && stream_ids.size() != particles) fail("one stream id per particle is required");
  const std::size_t d = model->dim();
  switch (initial.kind) {
    case InitialCondition::Kind::Points:
      if (initial.points.size() != d && initial.points.size() != d * particles) {
        std::ostringstream os;
        os << "initial points: expected " << d << " or " << d * particles << " coordinates, got "
           << initial.points.size();
        throw Error(ErrorKind::DimensionMismatch, os.str());
      }
      for (const double v : initial.points) {
        if (!std::isfinite(v)) fail("initial points must be finite");
      }
      break;
    case InitialCondition::Kind::Gaussian:
      if (!(initial.stddev >= 0.0) || !std::isfinite(initial.mean)) fail("gaussian initial condition is invalid");
      break;
    case InitialCondition::Kind::Uniform:
      if (!(initial.low <= initial.high) || !std::isfinite(initial.low) || !std::isfinite(initial.high)) {
        fail("uniform initial condition needs low <= high");
      }
      break;
  }
}

const Snapshot* TrajectoryRecord::find(double t) const {
  const double tol = dt > 0.0 ? kGridTolerance * dt : 1e-12;
  const auto it = std::lower_bound(snapshots.begin(), snapshots.end(), t - tol,
                                   [](const Snapshot& s, double v) { return s.time < v; });
  if (it == snapshots.end() || std::abs(it->time - t) > tol) return nullptr;
  return &*it;
}

std::vector<double> TrajectoryRecord::times() const {
  std::vector<double> t;
  t.reserve(snapshots.size());
  for (const auto& s : snapshots) t.push_back(s.time);
  return t;
}

void MomentTracker::observe(double t, const EmpiricalMeasure& mu, const MeasureView&, int) {
  if (!times_.empty()) {
    const bool wanted = std::any_of(times_.begin(), times_.end(),
                                    [&](double c) { return std::abs(c - t) <= tolerance_; });
    if (!wanted) return;
  }
  seen_.push_back(t);
  values_.push_back(moment(mu, MomentKind::Psi));
}

ParticleEnsemble em_step(const CoefficientModel& model, const ParticleEnsemble& ens, const EmpiricalMeasure& mu,
                         int regime, double dt, const ParticleNoise& noise, std::uint64_t step,
                         std::span<const std::uint64_t> stream_ids) {
  if (!(dt > 0.0)) throw Error(ErrorKind::ConfigInvalid, "dt must be positive");
  if (ens.dim != model.dim() || mu.dim() != model.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "ensemble, measure and model dimensions differ");
  }
  if (!stream_ids.empty() && stream_ids.size() != ens.size()) {
    throw Error(ErrorKind::ConfigInvalid, "one stream id per particle is required");
  }
  ParticleEnsemble out;
  out.dim = ens.dim;
  out.time = ens.time + dt;
  out.regime = regime;
  const MeasureView view = view_of(mu);
  advance_particles(model, ens.dim, ens.x, out.x, view, regime, dt, noise, step, stream_ids);
  return out;
}

ParticleEnsemble initial_ensemble(const SimConfig& config, std::uint64_t seed) {
  config.validate();
  const std::size_t d = config.model->dim();
  const std::size_t n = config.particles;
  ParticleEnsemble ens;
  ens.dim = d;
  ens.x.resize(n * d);
  const auto& ic = config.initial;
  const ParticleNoise draws(initial_seed(seed));
  std::vector<double> tmp(d);
  for (std::size_t k = 0; k < n; ++k) {
    std::span<double> x(ens.x.data() + k * d, d);
    switch (ic.kind) {
      case InitialCondition::Kind::Points:
        for (std::size_t i = 0; i < d; ++i) x[i] = ic.points.size() == d ? ic.points[i] : ic.points[k * d + i];
        break;
      case InitialCondition::Kind::Gaussian:
        draws.normals(stream_of(config.stream_ids, k), 0, tmp);
        for (std::size_t i = 0; i < d; ++i) x[i] = ic.mean + ic.stddev * tmp[i];
        break;
      case InitialCondition::Kind::Uniform:
        draws.uniforms(stream_of(config.stream_ids, k), 0, tmp);
        for (std::size_t i = 0; i < d; ++i) x[i] = ic.low + (ic.high - ic.low) * tmp[i];
        break;
    }
  }
  return ens;
}

TrajectoryRecord simulate(const SimConfig& config, const SwitchingPath& path, std::uint64_t seed,
                          StepObserver* observer) {
  const SimConfig cfg = with_default_checkpoints(config);
  cfg.validate();
  if (path.horizon() < cfg.horizon * (1.0 - 1e-12)) {
    throw Error(ErrorKind::ConfigInvalid, "switching path is shorter than the simulation horizon");
  }
  SegmentState state{initial_ensemble(cfg, seed), 0};
  TrajectoryRecord record;
  record.dim = cfg.model->dim();
  record.particles = cfg.particles;
  record.dt = cfg.dt;
  record.every_step = cfg.record_every_step;
  Engine(cfg, seed).run(state, cfg.horizon, path, observer, &record, true);
  return record;
}

ChainRun simulate_with_chain(const SimConfig& config, const GeneratorMatrix& q, int initial, ChainSeeds seeds,
                             StepObserver* observer) {
  config.validate();
  RandomStream chain_rng(seeds.chain);
  SwitchingPath path = sample_path(q, initial, config.horizon, chain_rng);
  TrajectoryRecord record = simulate(config, path, seeds.particles, observer);
  return {std::move(record), std::move(path)};
}

SegmentState initial_segment(const SimConfig& config, std::uint64_t seed) {
  return {initial_ensemble(config, seed), 0};
}

SegmentState advance_frozen(const SimConfig& config, SegmentState state, double t_end, int regime,
                            std::uint64_t seed) {
  const SimConfig cfg = with_default_checkpoints(config);
  cfg.validate();
  if (!(t_end > state.ensemble.time)) return state;
  const SwitchingPath path = SwitchingPath::constant(t_end, regime);
  Engine(cfg, seed).run(state, t_end, path, nullptr, nullptr, false);
  return state;
}

double diffusion_generator_apply(const CoefficientModel& model, const TestFunctionBundle& f, const MeasureView& mu,
                                 std::span<const double> x, int regime) {
  detail::LocalGenerator gen(model.dim());
  return gen.apply(model, f, x, mu, regime);
}

double generator_apply(const CoefficientModel& model, const GeneratorMatrix& q, const TestFunctionBundle& f,
                       const EmpiricalMeasure& mu, std::span<const double> x, int regime) {
  if (x.size() != model.dim() || f.dim != model.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "point, test function and model dimensions differ");
  }
  const MeasureView view = view_of(mu);
  double value = diffusion_generator_apply(model, f, view, x, regime);
  const double here = f.value(x, regime);
  const auto i = static_cast<std::size_t>(regime);
  for (std::size_t j = 0; j < q.size(); ++j) {
    if (j == i || q.rate(i, j) == 0.0) continue;
    value += q.rate(i, j) * (f.value(x, static_cast<int>(j)) - here);
  }
  return value;
}

double lyapunov_moment(const ParticleEnsemble& ens, double p) {
  if (!(p > 0.0 && p <= 1.0)) throw Error(ErrorKind::ConfigInvalid, "Lyapunov exponent must lie in (0, 1]");
  double acc = 0.0;
  for (const double v : ens.x) acc += v * v;
  return std::pow(acc / static_cast<double>(ens.size()) + 1.0, p);
}

}  // namespace mfswitch
