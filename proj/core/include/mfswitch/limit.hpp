#pragma once

// The conditional McKean-Vlasov limit given one switching path, approximated
// by a large reference ensemble on that path; the martingale-problem residual
// M_f and its quadratic variation; coupled law-of-large-numbers curves.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mfswitch/chain.hpp"
#include "mfswitch/dynamics.hpp"
#include "mfswitch/stats.hpp"
#include "mfswitch/test_functions.hpp"

namespace mfswitch {

/// Runs the finite system at reference size M on `path`.
/// Throws RefTooSmall when config.particles < floor.
[[nodiscard]] TrajectoryRecord conditional_law_reference(const SimConfig& config, const SwitchingPath& path,
                                                         std::uint64_t seed, std::size_t floor = 1024,
                                                         StepObserver* observer = nullptr);

/// simulate on the constant path at `regime`.
[[nodiscard]] TrajectoryRecord frozen_regime_mckean_vlasov(const SimConfig& config, int regime, std::uint64_t seed);

/// Online evaluation of
///   M_f(t) = <eta(t), f(., s(t))> - <eta(0), f(., s(0))>
///            - int_0^t <eta, (L(eta) f)(., s(u-))> du
///            - sum_{i != j} int_0^t <eta(u), f(., j) - f(., i)> dM_ij(u)
/// with left-endpoint quadrature over the observed substeps and the jump
/// martingales split into jump sums and compensators. Also accumulates
/// (1/N) int <eta, (a grad f, grad f)> du.
class MartingaleAccumulator final : public StepObserver {
 public:
  /// Values are kept at `record_times` (every observation when empty).
  MartingaleAccumulator(const CoefficientModel& model, const GeneratorMatrix& q, const TestFunctionBundle& f,
                        std::vector<double> record_times = {}, double tolerance = 1e-12);

  void observe(double t, const EmpiricalMeasure& mu, const MeasureView& view, int regime) override;

  [[nodiscard]] double time() const noexcept { return last_time_; }
  [[nodiscard]] double residual() const noexcept { return residual_; }
  [[nodiscard]] double quadratic_variation() const noexcept { return quadratic_variation_; }
  /// sum of <eta, f(j) - f(i)> over i->j jumps minus its compensator.
  [[nodiscard]] double compensated_jump_integral(int from, int to) const;

  [[nodiscard]] const std::vector<double>& recorded_times() const noexcept { return times_; }
  [[nodiscard]] const std::vector<double>& recorded_residuals() const noexcept { return residuals_; }
  [[nodiscard]] const std::vector<double>& recorded_variations() const noexcept { return variations_; }

 private:
  const CoefficientModel& model_;
  const GeneratorMatrix& q_;
  const TestFunctionBundle& f_;
  std::vector<double> record_times_;
  double tolerance_;

  bool started_ = false;
  double last_time_ = 0.0;
  int last_regime_ = 0;
  std::vector<double> last_values_;  ///< <eta, f(., j)> for every regime j
  double last_generator_ = 0.0;      ///< <eta, b'grad f + a:hess f / 2> at the last regime
  double last_energy_ = 0.0;         ///< (1/N) <eta, (a grad f, grad f)>

  double initial_value_ = 0.0;
  double drift_integral_ = 0.0;
  double switching_integral_ = 0.0;  ///< int <eta, Q f(., s(u-))> du
  double jump_sum_ = 0.0;
  Eigen::MatrixXd pair_jumps_;
  Eigen::MatrixXd pair_compensators_;
  double residual_ = 0.0;
  double quadratic_variation_ = 0.0;

  std::vector<double> times_, residuals_, variations_;
};

/// M_f(t) from a trajectory recorded at every substep. Throws
/// CheckpointMissing when the record is not dense or misses a jump time,
/// TimeNotOnGrid when t is not a recorded time.
[[nodiscard]] double martingale_residual(const TrajectoryRecord& traj, const SwitchingPath& path,
                                         const GeneratorMatrix& q, const CoefficientModel& model,
                                         const TestFunctionBundle& f, double t);

/// (1/N) int_0^t <eta, (a grad f, grad f)> du, same requirements.
[[nodiscard]] double quadratic_variation_estimate(const TrajectoryRecord& traj, const SwitchingPath& path,
                                                  const CoefficientModel& model, const TestFunctionBundle& f,
                                                  double t);

struct MartingaleResidualReport {
  std::string test_function;
  std::vector<double> times;
  std::vector<double> residuals;
  std::vector<double> quadratic_variation;
  std::size_t replicas = 1;
};

/// Full residual series of one dense trajectory.
[[nodiscard]] MartingaleResidualReport martingale_residual_report(const TrajectoryRecord& traj,
                                                                  const SwitchingPath& path,
                                                                  const GeneratorMatrix& q,
                                                                  const CoefficientModel& model,
                                                                  const TestFunctionBundle& f);

struct LlnSpec {
  SimConfig base;  ///< particles is ignored
  GeneratorMatrix q;
  int initial_regime = 0;
  std::vector<std::size_t> sizes;
  std::size_t reference = 8192;
  std::size_t reference_floor = 1024;
  double time = 1.0;  ///< comparison time, <= base.horizon
  std::size_t replicas = 20;
  std::uint64_t seed = 0;
  BlOptions bl;
  std::vector<double> moment_times;  ///< where <mu_N, psi> is tracked for every size

  /// Throws RefTooSmall, ConfigInvalid.
  void validate() const;
};

struct LlnReplica {
  std::vector<double> distances;  ///< one per size
  std::vector<bool> exact;
  std::size_t jumps = 0;
  /// moments[k][j]: <mu, psi> of system k (sizes..., then the reference) at moment_times[j]
  std::vector<std::vector<double>> moments;
};

/// One replica: a single switching path, the reference and every size run
/// on it. The particle seed depends only on (seed, replica, size), so a size
/// equal to the reference reproduces it exactly.
[[nodiscard]] LlnReplica lln_replica(const LlnSpec& spec, std::size_t replica);

struct LlnPoint {
  std::size_t n = 0;
  SampleSummary distance;
  bool exact = true;
};

struct LLNCurve {
  std::vector<LlnPoint> points;
  std::size_t reference = 0;
  double time = 0.0;
  RateFit fit;          ///< valid when fitted is set
  bool fitted = false;  ///< at least 3 sizes with positive mean distance
};

[[nodiscard]] LLNCurve summarize_lln(const LlnSpec& spec, const std::vector<LlnReplica>& replicas);

/// All replicas, then the summary.
[[nodiscard]] LLNCurve lln_distance_curve(const LlnSpec& spec);

}  // namespace mfswitch
