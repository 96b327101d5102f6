#include "mfswitch/limit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <tbb/parallel_for.h>

#include "local_generator.hpp"
#include "replay.hpp"
#include "mfswitch/error.hpp"

namespace mfswitch {

TrajectoryRecord conditional_law_reference(const SimConfig& config, const SwitchingPath& path, std::uint64_t seed,
                                           std::size_t floor, StepObserver* observer) {
  if (config.particles < floor) {
    std::ostringstream os;
    os << "reference ensemble has " << config.particles << " particles, floor is " << floor;
    throw Error(ErrorKind::RefTooSmall, os.str());
  }
  return simulate(config, path, seed, observer);
}

TrajectoryRecord frozen_regime_mckean_vlasov(const SimConfig& config, int regime, std::uint64_t seed) {
  return simulate(config, SwitchingPath::constant(config.horizon, regime), seed);
}

MartingaleAccumulator::MartingaleAccumulator(const CoefficientModel& model, const GeneratorMatrix& q,
                                             const TestFunctionBundle& f, std::vector<double> record_times,
                                             double tolerance)
    : model_(model),
      q_(q),
      f_(f),
      record_times_(std::move(record_times)),
      tolerance_(tolerance),
      last_values_(q.size(), 0.0),
      pair_jumps_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(q.size()), static_cast<Eigen::Index>(q.size()))),
      pair_compensators_(pair_jumps_) {
  if (f.dim != model.dim()) throw Error(ErrorKind::DimensionMismatch, "test function and model dimensions differ");
}

void MartingaleAccumulator::observe(double t, const EmpiricalMeasure& mu, const MeasureView& view, int regime) {
  const std::size_t m0 = q_.size();
  if (regime < 0 || static_cast<std::size_t>(regime) >= m0) {
    throw Error(ErrorKind::UnknownState, "regime " + std::to_string(regime) + " outside the generator");
  }
  std::vector<double> values(m0, 0.0);
  double generator = 0.0;
  double energy = 0.0;
  detail::LocalGenerator local(model_.dim());
  for (std::size_t k = 0; k < mu.size(); ++k) {
    const auto x = mu.atom(k);
    const double w = mu.weight(k);
    for (std::size_t j = 0; j < m0; ++j) values[j] += w * f_.value(x, static_cast<int>(j));
    double e = 0.0;
    generator += w * local.apply(model_, f_, x, view, regime, &e);
    energy += w * e;
  }
  energy /= static_cast<double>(mu.size());

  const auto cur = static_cast<std::size_t>(regime);
  if (!started_) {
    started_ = true;
    initial_value_ = values[cur];
  } else {
    const double h = t - last_time_;
    drift_integral_ += h * last_generator_;
    quadratic_variation_ += h * last_energy_;
    const auto i = static_cast<std::size_t>(last_regime_);
    for (std::size_t j = 0; j < m0; ++j) {
      if (j == i) continue;
      const double c = h * q_.rate(i, j) * (last_values_[j] - last_values_[i]);
      pair_compensators_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += c;
      switching_integral_ += c;
    }
    if (regime != last_regime_) {
      const double jump = values[cur] - values[i];
      pair_jumps_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(cur)) += jump;
      jump_sum_ += jump;
    }
  }
  residual_ = values[cur] - initial_value_ - (drift_integral_ + switching_integral_) -
              (jump_sum_ - switching_integral_);

  last_time_ = t;
  last_regime_ = regime;
  last_values_ = std::move(values);
  last_generator_ = generator;
  last_energy_ = energy;

  const bool keep = record_times_.empty() ||
                    std::any_of(record_times_.begin(), record_times_.end(),
                                [&](double r) { return std::abs(r - t) <= tolerance_; });
  if (keep) {
    times_.push_back(t);
    residuals_.push_back(residual_);
    variations_.push_back(quadratic_variation_);
  }
}

double MartingaleAccumulator::compensated_jump_integral(int from, int to) const {
  const auto m0 = static_cast<int>(q_.size());
  if (from < 0 || to < 0 || from >= m0 || to >= m0) {
    throw Error(ErrorKind::UnknownState, "pair outside the generator");
  }
  return pair_jumps_(from, to) - pair_compensators_(from, to);
}

namespace {

GeneratorMatrix silent_generator(std::size_t m) {
  return validate_generator(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m)));
}

}  // namespace

double martingale_residual(const TrajectoryRecord& traj, const SwitchingPath& path, const GeneratorMatrix& q,
                           const CoefficientModel& model, const TestFunctionBundle& f, double t) {
  MartingaleAccumulator acc(model, q, f);
  detail::replay(traj, path, t, acc);
  return acc.residual();
}

double quadratic_variation_estimate(const TrajectoryRecord& traj, const SwitchingPath& path,
                                    const CoefficientModel& model, const TestFunctionBundle& f, double t) {
  const GeneratorMatrix q = silent_generator(model.regimes());
  MartingaleAccumulator acc(model, q, f);
  detail::replay(traj, path, t, acc);
  return acc.quadratic_variation();
}

MartingaleResidualReport martingale_residual_report(const TrajectoryRecord& traj, const SwitchingPath& path,
                                                    const GeneratorMatrix& q, const CoefficientModel& model,
                                                    const TestFunctionBundle& f) {
  MartingaleAccumulator acc(model, q, f);
  detail::replay(traj, path, traj.snapshots.empty() ? 0.0 : traj.snapshots.back().time, acc);
  return {f.id, acc.recorded_times(), acc.recorded_residuals(), acc.recorded_variations(), 1};
}

void LlnSpec::validate() const {
  if (sizes.empty()) throw Error(ErrorKind::ConfigInvalid, "LLN study needs at least one size");
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    if (sizes[k] == 0) throw Error(ErrorKind::ConfigInvalid, "sizes must be positive");
    if (k > 0 && sizes[k] <= sizes[k - 1]) throw Error(ErrorKind::ConfigInvalid, "sizes must be strictly increasing");
  }
  if (reference < reference_floor) {
    std::ostringstream os;
    os << "reference size " << reference << " is below the floor " << reference_floor;
    throw Error(ErrorKind::RefTooSmall, os.str());
  }
  if (sizes.back() > reference) {
    throw Error(ErrorKind::RefTooSmall, "every size must be at most the reference size");
  }
  if (replicas == 0) throw Error(ErrorKind::ConfigInvalid, "replica count must be at least 1");
  if (!(time > 0.0 && time <= base.horizon)) throw Error(ErrorKind::ConfigInvalid, "comparison time outside (0, T]");
  if (base.model && q.size() != base.model->regimes()) {
    throw Error(ErrorKind::DimensionMismatch, "generator size differs from the model's regime count");
  }
  SimConfig probe = base;
  probe.particles = reference;
  probe.validate();
}

LlnReplica lln_replica(const LlnSpec& spec, std::size_t replica) {
  RandomStream chain_rng(derive_seed(spec.seed, replica, "chain"));
  const SwitchingPath path = sample_path(spec.q, spec.initial_regime, spec.base.horizon, chain_rng);

  SimConfig cfg = spec.base;
  cfg.checkpoints = {0.0, spec.time};
  cfg.record_every_step = false;
  auto seed_for = [&](std::size_t n) { return derive_seed(spec.seed, replica, "particles-" + std::to_string(n)); };

  LlnReplica out;
  out.jumps = path.jump_count();
  auto run = [&](std::size_t n, bool reference) {
    cfg.particles = n;
    MomentTracker moments(spec.moment_times, 1e-9 * cfg.dt);
    cfg.stream_ids.clear();
    TrajectoryRecord rec = reference
                               ? conditional_law_reference(cfg, path, seed_for(n), spec.reference_floor, &moments)
                               : simulate(cfg, path, seed_for(n), &moments);
    out.moments.push_back(moments.values());
    const Snapshot* s = rec.find(spec.time);
    if (s == nullptr) throw Error(ErrorKind::CheckpointMissing, "comparison time was not recorded");
    return s->measure;
  };

  std::vector<EmpiricalMeasure> finite;
  finite.reserve(spec.sizes.size());
  for (const std::size_t n : spec.sizes) finite.push_back(run(n, false));
  const EmpiricalMeasure ref = run(spec.reference, true);
  for (const auto& mu : finite) {
    const BlDistance d = bl_distance(mu, ref, spec.bl);
    out.distances.push_back(d.value);
    out.exact.push_back(d.exact);
  }
  return out;
}

LLNCurve summarize_lln(const LlnSpec& spec, const std::vector<LlnReplica>& replicas) {
  LLNCurve curve;
  curve.reference = spec.reference;
  curve.time = spec.time;
  std::vector<double> scales, means;
  for (std::size_t k = 0; k < spec.sizes.size(); ++k) {
    std::vector<double> d;
    bool exact = true;
    for (const auto& r : replicas) {
      d.push_back(r.distances[k]);
      exact = exact && r.exact[k];
    }
    LlnPoint p{spec.sizes[k], summarize(d), exact};
    if (p.distance.mean > 0.0) {
      scales.push_back(static_cast<double>(p.n));
      means.push_back(p.distance.mean);
    }
    curve.points.push_back(p);
  }
  if (scales.size() >= 3) {
    curve.fit = fit_rate(scales, means);
    curve.fitted = true;
  }
  return curve;
}

LLNCurve lln_distance_curve(const LlnSpec& spec) {
  spec.validate();
  std::vector<LlnReplica> results(spec.replicas);
  tbb::parallel_for(std::size_t{0}, spec.replicas, [&](std::size_t r) { results[r] = lln_replica(spec, r); });
  return summarize_lln(spec, results);
}

}  // namespace mfswitch
