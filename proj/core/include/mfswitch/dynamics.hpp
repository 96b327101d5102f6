#pragma once

// Euler-Maruyama integration of
//   dx_i = b(x_i, mu_N, alpha(t-)) dt + sigma(x_i, mu_N, alpha(t-)) dw_i,
// with the time grid cut at every jump of the switching path.

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

#include "mfswitch/chain.hpp"
#include "mfswitch/measure.hpp"
#include "mfswitch/models.hpp"
#include "mfswitch/random.hpp"
#include "mfswitch/test_functions.hpp"

namespace mfswitch {

struct ParticleEnsemble {
  std::size_t dim = 1;
  std::vector<double> x;  ///< particle k occupies x[k*dim, (k+1)*dim)
  double time = 0.0;
  int regime = 0;

  [[nodiscard]] std::size_t size() const noexcept { return x.size() / dim; }
  [[nodiscard]] std::span<const double> particle(std::size_t k) const noexcept {
    return {x.data() + k * dim, dim};
  }
  /// Uniform empirical measure, atoms in particle order.
  [[nodiscard]] EmpiricalMeasure measure() const { return EmpiricalMeasure::uniform(dim, x); }

  friend bool operator==(const ParticleEnsemble&, const ParticleEnsemble&) = default;
};

struct InitialCondition {
  enum class Kind { Points, Gaussian, Uniform };
  Kind kind = Kind::Gaussian;
  /// Points: either N*d coordinates, or d coordinates shared by every particle.
  std::vector<double> points;
  double mean = 0.0;    ///< Gaussian: iid N(mean, stddev^2 I)
  double stddev = 1.0;
  double low = -1.0;    ///< Uniform: iid on [low, high]^d
  double high = 1.0;
};

struct SimConfig {
  ModelPtr model;
  std::size_t particles = 256;
  double horizon = 1.0;
  double dt = 1e-3;
  InitialCondition initial;
  /// Times in [0, T] at which the measure is recorded; empty means {0, T}.
  /// A checkpoint within 1e-9 dt of a grid point is moved onto it.
  std::vector<double> checkpoints;
  /// Record every substep end instead of the checkpoints alone.
  bool record_every_step = false;
  /// Noise stream of each particle; empty means stream k for particle k.
  std::vector<std::uint64_t> stream_ids;

  /// Throws ConfigInvalid (or DimensionMismatch for initial points).
  void validate() const;
};

struct Snapshot {
  double time = 0.0;
  int regime = 0;  ///< path value at `time`
  EmpiricalMeasure measure;

  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

struct TrajectoryRecord {
  std::size_t dim = 1;
  std::size_t particles = 0;
  double dt = 0.0;
  bool every_step = false;
  std::vector<Snapshot> snapshots;

  /// Snapshot recorded at t (tolerance 1e-9 dt); nullptr if absent.
  [[nodiscard]] const Snapshot* find(double t) const;
  [[nodiscard]] std::vector<double> times() const;

  friend bool operator==(const TrajectoryRecord&, const TrajectoryRecord&) = default;
};

/// Receives the state at t = 0 and after every substep together with the
/// regime that holds from t onwards.
class StepObserver {
 public:
  virtual ~StepObserver() = default;
  virtual void observe(double t, const EmpiricalMeasure& mu, const MeasureView& view, int regime) = 0;
};

/// Forwards every observation to each member in order.
class ObserverList final : public StepObserver {
 public:
  ObserverList() = default;
  ObserverList(std::initializer_list<StepObserver*> members) : members_(members) {}
  void add(StepObserver* member) { members_.push_back(member); }
  void observe(double t, const EmpiricalMeasure& mu, const MeasureView& view, int regime) override {
    for (auto* m : members_) {
      if (m != nullptr) m->observe(t, mu, view, regime);
    }
  }

 private:
  std::vector<StepObserver*> members_;
};

/// Records <mu(t), psi> at the requested times (every observation when the
/// list is empty).
class MomentTracker final : public StepObserver {
 public:
  explicit MomentTracker(std::vector<double> times = {}, double tolerance = 1e-12)
      : times_(std::move(times)), tolerance_(tolerance) {}
  void observe(double t, const EmpiricalMeasure& mu, const MeasureView& view, int regime) override;

  [[nodiscard]] const std::vector<double>& times() const noexcept { return seen_; }
  [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }

 private:
  std::vector<double> times_;
  double tolerance_;
  std::vector<double> seen_;
  std::vector<double> values_;
};

/// One explicit step with the measure frozen at the step start. The noise of
/// particle k is the draw (stream_ids[k], step) of `noise`.
/// Throws NonFiniteState, ConfigInvalid for dt <= 0.
[[nodiscard]] ParticleEnsemble em_step(const CoefficientModel& model, const ParticleEnsemble& ens,
                                       const EmpiricalMeasure& mu, int regime, double dt,
                                       const ParticleNoise& noise, std::uint64_t step,
                                       std::span<const std::uint64_t> stream_ids = {});

/// Initial ensemble drawn from config.initial with the initial-condition
/// stream of `seed`.
[[nodiscard]] ParticleEnsemble initial_ensemble(const SimConfig& config, std::uint64_t seed);

/// Integrates on [0, T] along `path`. Deterministic in (config, path, seed).
/// Throws ConfigInvalid (including path.horizon < T), NonFiniteState,
/// UnknownState when the path visits a regime the model lacks.
[[nodiscard]] TrajectoryRecord simulate(const SimConfig& config, const SwitchingPath& path, std::uint64_t seed,
                                        StepObserver* observer = nullptr);

struct ChainSeeds {
  std::uint64_t chain = 0;
  std::uint64_t particles = 0;
};

struct ChainRun {
  TrajectoryRecord record;
  SwitchingPath path;
};

/// Samples the path from seeds.chain, then simulates with seeds.particles.
[[nodiscard]] ChainRun simulate_with_chain(const SimConfig& config, const GeneratorMatrix& q, int initial,
                                           ChainSeeds seeds, StepObserver* observer = nullptr);

/// Ensemble plus the global substep counter that addresses its next noise draw.
struct SegmentState {
  ParticleEnsemble ensemble;
  std::uint64_t step = 0;
};

[[nodiscard]] SegmentState initial_segment(const SimConfig& config, std::uint64_t seed);

/// Continues `state` from its time to t_end with the regime frozen, on the
/// same global grid k*dt as simulate; chaining segments at the jump times of
/// a path reproduces simulate on that path exactly.
[[nodiscard]] SegmentState advance_frozen(const SimConfig& config, SegmentState state, double t_end, int regime,
                                          std::uint64_t seed);

/// b'grad f + (1/2) tr(a hess f) + sum_j q_ij (f(x, j) - f(x, i)).
[[nodiscard]] double generator_apply(const CoefficientModel& model, const GeneratorMatrix& q,
                                     const TestFunctionBundle& f, const EmpiricalMeasure& mu,
                                     std::span<const double> x, int regime);

/// Same without the switching term: b'grad f + (1/2) tr(a hess f).
[[nodiscard]] double diffusion_generator_apply(const CoefficientModel& model, const TestFunctionBundle& f,
                                               const MeasureView& mu, std::span<const double> x, int regime);

/// ((1/N) sum |x_i|^2 + 1)^p. Throws ConfigInvalid unless p in (0, 1].
[[nodiscard]] double lyapunov_moment(const ParticleEnsemble& ens, double p);

}  // namespace mfswitch
