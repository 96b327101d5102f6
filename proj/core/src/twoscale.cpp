#include "mfswitch/twoscale.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <tbb/parallel_for.h>

#include "local_generator.hpp"
#include "mfswitch/error.hpp"
#include "mfswitch/random.hpp"
#include "replay.hpp"

namespace mfswitch {

Eigen::MatrixXd matrix_sqrt_spd(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw Error(ErrorKind::NotSymmetric, "matrix is not square");
  if (!a.allFinite()) throw Error(ErrorKind::NonFiniteValue, "matrix has non-finite entries");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw Error(ErrorKind::NotSymmetric, "matrix differs from its transpose");
  }
  const Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(sym);
  if (llt.info() == Eigen::Success) {
    Eigen::MatrixXd l = llt.matrixL();
    // a pivot this small means rank deficiency; the symmetric root is steadier there
    if (l.diagonal().minCoeff() > 1e-7 * std::sqrt(scale)) return l;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  Eigen::VectorXd lambda = eig.eigenvalues();
  if (lambda.minCoeff() < -1e-12 * scale) {
    std::ostringstream os;
    os << "smallest eigenvalue " << lambda.minCoeff() << " is below -1e-12";
    throw Error(ErrorKind::IndefiniteBeyondTolerance, os.str());
  }
  lambda = lambda.cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
}

namespace {

thread_local std::vector<double> scratch_b;
thread_local std::vector<double> scratch_a;

std::span<double> sized(std::vector<double>& v, std::size_t n) {
  if (v.size() < n) v.resize(n);
  return {v.data(), n};
}

void write_sqrt(std::span<const double> a, std::size_t d, std::span<double> out) {
  bool diagonal = true;
  for (std::size_t i = 0; i < d && diagonal; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      if (i != j && a[i * d + j] != 0.0) {
        diagonal = false;
        break;
      }
    }
  }
  if (diagonal) {
    for (std::size_t i = 0; i < d; ++i) {
      const double v = a[i * d + i];
      if (v < -1e-12) throw Error(ErrorKind::IndefiniteBeyondTolerance, "negative diagonal in averaged a");
      for (std::size_t j = 0; j < d; ++j) out[i * d + j] = 0.0;
      out[i * d + i] = std::sqrt(std::max(v, 0.0));
    }
    return;
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a[i * d + j];
  }
  const Eigen::MatrixXd s = matrix_sqrt_spd(m);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) out[i * d + j] = s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
}

}  // namespace

AveragedModel::AveragedModel(ModelPtr base, AggregationResult aggregation)
    : base_(std::move(base)), aggregation_(std::move(aggregation)) {
  if (!base_) throw Error(ErrorKind::ConfigInvalid, "averaged model needs a base model");
  if (base_->regimes() != aggregation_.partition.states()) {
    std::ostringstream os;
    os << "model has " << base_->regimes() << " regimes, partition has " << aggregation_.partition.states()
       << " states";
    throw Error(ErrorKind::DimensionMismatch, os.str());
  }
  const Partition& p = aggregation_.partition;
  members_.resize(p.blocks());
  for (std::size_t b = 0; b < p.blocks(); ++b) {
    for (std::size_t j = 0; j < p.block_size(b); ++j) {
      const int s = p.flat(b, j);
      const double w = aggregation_.weight(s);
      if (w != 0.0) members_[b].push_back({s, w});
    }
  }
}

std::string AveragedModel::name() const { return "averaged(" + base_->name() + ")"; }

void AveragedModel::drift(std::span<const double> x, const MeasureView& mu, int regime, std::span<double> out) const {
  const std::size_t d = dim();
  average(regime, d, sized(scratch_b, d), out, [&](int s, std::span<double> buf) { base_->drift(x, mu, s, buf); });
}

void AveragedModel::diffusion_squared(std::span<const double> x, const MeasureView& mu, int regime,
                                      std::span<double> out) const {
  const std::size_t d = dim();
  average(regime, d * d, sized(scratch_b, d * d), out,
          [&](int s, std::span<double> buf) { base_->diffusion_squared(x, mu, s, buf); });
}

void AveragedModel::diffusion(std::span<const double> x, const MeasureView& mu, int regime,
                              std::span<double> out) const {
  const std::size_t d = dim();
  // scratch_b is used by diffusion_squared itself
  const auto a = sized(scratch_a, d * d);
  diffusion_squared(x, mu, regime, a);
  write_sqrt(a, d, out);
}

std::shared_ptr<const AveragedModel> average_coefficients(ModelPtr model, const AggregationResult& aggregation) {
  return std::make_shared<const AveragedModel>(std::move(model), aggregation);
}

namespace {

class SigmaAveragedModel final : public CoefficientModel {
 public:
  explicit SigmaAveragedModel(std::shared_ptr<const AveragedModel> avg) : avg_(std::move(avg)) {}

  std::string name() const override { return "sigma-averaged(" + avg_->base().name() + ")"; }
  std::size_t dim() const override { return avg_->dim(); }
  std::size_t regimes() const override { return avg_->regimes(); }
  ModelConstants constants() const override { return avg_->constants(); }

  void drift(std::span<const double> x, const MeasureView& mu, int regime, std::span<double> out) const override {
    avg_->drift(x, mu, regime, out);
  }
  void diffusion(std::span<const double> x, const MeasureView& mu, int regime,
                 std::span<double> out) const override {
    const std::size_t d = dim();
    avg_->average(regime, d * d, sized(scratch_a, d * d), out,
                  [&](int s, std::span<double> buf) { avg_->base().diffusion(x, mu, s, buf); });
  }

 private:
  std::shared_ptr<const AveragedModel> avg_;
};

}  // namespace

ModelPtr sigma_averaged_model(ModelPtr model, const AggregationResult& aggregation) {
  return std::make_shared<const SigmaAveragedModel>(average_coefficients(std::move(model), aggregation));
}

OperatorResidualAccumulator::OperatorResidualAccumulator(const CoefficientModel& model,
                                                         const AveragedModel& averaged,
                                                         const GeneratorMatrix& q_eps, const GeneratorMatrix& q_bar,
                                                         const TestFunctionBundle& f)
    : model_(model), averaged_(averaged), q_eps_(q_eps), q_bar_(q_bar), f_(f) {
  if (f.dim != model.dim() || averaged.dim() != model.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "test function and model dimensions differ");
  }
  if (q_eps.size() != model.regimes() || q_bar.size() != averaged.regimes()) {
    throw Error(ErrorKind::DimensionMismatch, "generators do not match the models' regime counts");
  }
}

double OperatorResidualAccumulator::integrand(const EmpiricalMeasure& mu, const MeasureView& view, int flat) const {
  const int block = averaged_.aggregation().partition.block_of(flat);
  const auto i = static_cast<std::size_t>(flat);
  const auto b = static_cast<std::size_t>(block);
  detail::LocalGenerator fast(model_.dim());
  detail::LocalGenerator slow(model_.dim());
  double acc = 0.0;
  for (std::size_t k = 0; k < mu.size(); ++k) {
    const auto x = mu.atom(k);
    double v = fast.apply(model_, f_, x, view, flat) - slow.apply(averaged_, f_, x, view, block);
    const double fi = f_.value(x, flat);
    for (std::size_t j = 0; j < q_eps_.size(); ++j) {
      const double r = q_eps_.rate(i, j);
      if (j != i && r != 0.0) v += r * (f_.value(x, static_cast<int>(j)) - fi);
    }
    const double fb = f_.value(x, block);
    for (std::size_t j = 0; j < q_bar_.size(); ++j) {
      const double r = q_bar_.rate(b, j);
      if (j != b && r != 0.0) v -= r * (f_.value(x, static_cast<int>(j)) - fb);
    }
    acc += mu.weight(k) * v;
  }
  return acc;
}

void OperatorResidualAccumulator::observe(double t, const EmpiricalMeasure& mu, const MeasureView& view,
                                          int regime) {
  if (regime < 0 || static_cast<std::size_t>(regime) >= q_eps_.size()) {
    throw Error(ErrorKind::UnknownState, "regime " + std::to_string(regime) + " outside the fast generator");
  }
  if (started_) value_ += (t - last_time_) * last_integrand_;
  started_ = true;
  last_time_ = t;
  last_integrand_ = integrand(mu, view, regime);
}

double operator_residual(const TrajectoryRecord& traj, const SwitchingPath& fast, const SwitchingPath& agg_path,
                         const CoefficientModel& model, const AveragedModel& averaged, const GeneratorMatrix& q_eps,
                         const GeneratorMatrix& q_bar, const TestFunctionBundle& f, double t) {
  if (!(project_path(fast, averaged.aggregation().partition) == agg_path)) {
    throw Error(ErrorKind::PathMismatch, "aggregated path is not the projection of the fast path");
  }
  OperatorResidualAccumulator acc(model, averaged, q_eps, q_bar, f);
  detail::replay(traj, fast, t, acc);
  return acc.value();
}

namespace {

void check_epsilons(const std::vector<double>& eps) {
  if (eps.empty()) throw Error(ErrorKind::ConfigInvalid, "epsilon list is empty");
  for (std::size_t k = 0; k < eps.size(); ++k) {
    if (!(eps[k] > 0.0) || !std::isfinite(eps[k])) throw Error(ErrorKind::ConfigInvalid, "epsilon must be positive");
    if (k > 0 && eps[k] >= eps[k - 1]) throw Error(ErrorKind::ConfigInvalid, "epsilons must be strictly decreasing");
  }
}

void check_state(int s, std::size_t states, const char* what) {
  if (s < 0 || static_cast<std::size_t>(s) >= states) {
    throw Error(ErrorKind::ConfigInvalid, std::string(what) + " " + std::to_string(s) + " outside the chain");
  }
}

std::vector<TestFunctionBundle> functions_of(const TwoScaleExperimentSpec& spec) {
  if (!spec.functions.empty()) return spec.functions;
  return {psi_function(spec.model->dim())};
}

}  // namespace

void TwoScaleExperimentSpec::validate() const {
  if (!model) throw Error(ErrorKind::ConfigInvalid, "two-scale study needs a model");
  if (model->regimes() != chain.states()) {
    std::ostringstream os;
    os << "model has " << model->regimes() << " regimes, chain has " << chain.states() << " states";
    throw Error(ErrorKind::DimensionMismatch, os.str());
  }
  check_epsilons(epsilons);
  if (particles == 0) throw Error(ErrorKind::ConfigInvalid, "particle count must be at least 1");
  if (replicas == 0) throw Error(ErrorKind::ConfigInvalid, "replica count must be at least 1");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw Error(ErrorKind::ConfigInvalid, "horizon must be positive");
  if (!(dt > 0.0) || dt > horizon) throw Error(ErrorKind::ConfigInvalid, "dt must be in (0, T]");
  if (!fast_dt.empty()) {
    if (fast_dt.size() != epsilons.size()) {
      throw Error(ErrorKind::ConfigInvalid, "fast_dt needs one step per epsilon");
    }
    for (std::size_t k = 0; k < fast_dt.size(); ++k) {
      if (!(fast_dt[k] > 0.0) || fast_dt[k] > epsilons[k] / 10.0 * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "step " << fast_dt[k] << " does not resolve eps = " << epsilons[k] << " (need dt <= eps/10)";
        throw Error(ErrorKind::ConfigInvalid, os.str());
      }
    }
  }
  check_state(initial_state, chain.states(), "initial state");
  for (const auto& f : functions) {
    if (f.dim != model->dim()) throw Error(ErrorKind::DimensionMismatch, "test function " + f.id + " has wrong dimension");
  }
  if (!residual_function.id.empty() && residual_function.dim != model->dim()) {
    throw Error(ErrorKind::DimensionMismatch, "residual test function has wrong dimension");
  }
  for (const double t : moment_times) {
    if (t < 0.0 || t > horizon) throw Error(ErrorKind::ConfigInvalid, "moment time outside [0, T]");
  }
  SimConfig probe;
  probe.model = model;
  probe.particles = particles;
  probe.horizon = horizon;
  probe.dt = dt;
  probe.initial = initial;
  probe.validate();
}

double TwoScaleExperimentSpec::fast_step(std::size_t k) const {
  if (!fast_dt.empty()) return fast_dt.at(k);
  return std::min(dt, epsilons.at(k) / 10.0);
}

TwoScaleReplica two_scale_replica(const TwoScaleExperimentSpec& spec, std::size_t replica) {
  const AggregationResult agg = aggregate(spec.chain);
  const auto avg = average_coefficients(spec.model, agg);
  const auto functions = functions_of(spec);
  const TestFunctionBundle residual_f =
      spec.residual_function.id.empty() ? psi_function(spec.model->dim()) : spec.residual_function;

  SimConfig cfg;
  cfg.particles = spec.particles;
  cfg.horizon = spec.horizon;
  cfg.initial = spec.initial;
  cfg.checkpoints = {0.0, spec.horizon};

  auto values_at_end = [&](const TrajectoryRecord& rec, int regime) {
    const Snapshot& end = rec.snapshots.back();
    std::vector<double> out;
    for (const auto& f : functions) out.push_back(integrate(end.measure, f.at(regime)));
    return out;
  };

  TwoScaleReplica out;
  for (std::size_t k = 0; k < spec.epsilons.size(); ++k) {
    const std::string tag = std::to_string(k);
    const GeneratorMatrix q_eps = build_fast_generator(spec.chain.with_epsilon(spec.epsilons[k]));
    RandomStream rng(derive_seed(spec.seed, replica, "fast-chain-" + tag));
    const SwitchingPath path = sample_path(q_eps, spec.initial_state, spec.horizon, rng);

    cfg.model = spec.model;
    cfg.dt = spec.fast_step(k);
    OperatorResidualAccumulator residual(*spec.model, *avg, q_eps, agg.q_bar, residual_f);
    MomentTracker moments(spec.moment_times, 1e-9 * cfg.dt);
    ObserverList observers{&residual, &moments};
    const TrajectoryRecord rec = simulate(cfg, path, derive_seed(spec.seed, replica, "fast-particles-" + tag), &observers);
    out.fast.push_back(values_at_end(rec, path.value_at(spec.horizon)));
    out.operator_residual.push_back(residual.value());
    out.moments.push_back(moments.values());
  }

  const int start = agg.partition.block_of(spec.initial_state);
  auto run_block_system = [&](const ModelPtr& model, const std::string& role) {
    RandomStream rng(derive_seed(spec.seed, replica, role + "-chain"));
    const SwitchingPath path = sample_path(agg.q_bar, start, spec.horizon, rng);
    cfg.model = model;
    cfg.dt = spec.dt;
    MomentTracker moments(spec.moment_times, 1e-9 * cfg.dt);
    const TrajectoryRecord rec = simulate(cfg, path, derive_seed(spec.seed, replica, role + "-particles"), &moments);
    out.moments.push_back(moments.values());
    return values_at_end(rec, path.value_at(spec.horizon));
  };
  out.averaged = run_block_system(avg, "averaged");
  if (spec.control) out.control = run_block_system(sigma_averaged_model(spec.model, agg), "control");
  return out;
}

TwoScaleTable summarize_two_scale(const TwoScaleExperimentSpec& spec, const std::vector<TwoScaleReplica>& replicas) {
  const auto functions = functions_of(spec);
  TwoScaleTable table;
  auto column = [&](auto&& pick) {
    std::vector<double> v;
    v.reserve(replicas.size());
    for (const auto& r : replicas) v.push_back(pick(r));
    return summarize(v);
  };
  for (std::size_t k = 0; k < spec.epsilons.size(); ++k) {
    const SampleSummary residual = column([&](const TwoScaleReplica& r) { return std::abs(r.operator_residual[k]); });
    for (std::size_t f = 0; f < functions.size(); ++f) {
      TwoScaleRow row;
      row.epsilon = spec.epsilons[k];
      row.function = functions[f].id;
      row.fast = column([&](const TwoScaleReplica& r) { return r.fast[k][f]; });
      row.averaged = column([&](const TwoScaleReplica& r) { return r.averaged[f]; });
      row.difference = std::abs(row.fast.mean - row.averaged.mean);
      row.difference_se = std::hypot(row.fast.se, row.averaged.se);
      if (spec.control) {
        row.control = column([&](const TwoScaleReplica& r) { return r.control[f]; });
        row.control_gap = std::abs(row.fast.mean - row.control.mean);
        row.control_gap_se = std::hypot(row.fast.se, row.control.se);
      }
      row.residual_abs = residual;
      table.rows.push_back(row);
    }
  }
  return table;
}

TwoScaleTable two_scale_experiment(const TwoScaleExperimentSpec& spec) {
  spec.validate();
  std::vector<TwoScaleReplica> results(spec.replicas);
  tbb::parallel_for(std::size_t{0}, spec.replicas, [&](std::size_t r) { results[r] = two_scale_replica(spec, r); });
  return summarize_two_scale(spec, results);
}

void OccupationSpec::validate() const {
  check_epsilons(epsilons);
  if (replicas == 0) throw Error(ErrorKind::ConfigInvalid, "replica count must be at least 1");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw Error(ErrorKind::ConfigInvalid, "horizon must be positive");
  check_state(initial_state, chain.states(), "initial state");
  check_state(flat_state, chain.states(), "measured state");
}

std::vector<double> occupation_replica(const OccupationSpec& spec, std::size_t replica) {
  const AggregationResult agg = aggregate(spec.chain);
  std::vector<double> out;
  for (std::size_t k = 0; k < spec.epsilons.size(); ++k) {
    const GeneratorMatrix q = build_fast_generator(spec.chain.with_epsilon(spec.epsilons[k]));
    RandomStream rng(derive_seed(spec.seed, replica, "occupation-chain-" + std::to_string(k)));
    const SwitchingPath fast = sample_path(q, spec.initial_state, spec.horizon, rng);
    const SwitchingPath lumped = project_path(fast, agg.partition);
    out.push_back(occupation_residual(fast, lumped, agg, spec.flat_state, spec.horizon));
  }
  return out;
}

OccupationCurve summarize_occupation(const OccupationSpec& spec, const std::vector<std::vector<double>>& replicas) {
  OccupationCurve curve;
  curve.epsilons = spec.epsilons;
  std::vector<double> means;
  for (std::size_t k = 0; k < spec.epsilons.size(); ++k) {
    std::vector<double> v;
    for (const auto& r : replicas) v.push_back(std::abs(r[k]));
    curve.abs_residual.push_back(summarize(v));
    means.push_back(curve.abs_residual.back().mean);
  }
  if (means.size() >= 3 && std::all_of(means.begin(), means.end(), [](double m) { return m > 0.0; })) {
    curve.fit = fit_rate(spec.epsilons, means);
    curve.fitted = true;
  }
  return curve;
}

}  // namespace mfswitch
