#pragma once

// Two-time-scale systems: coefficients averaged over the fast blocks'
// stationary laws, the operator-averaging residual, and epsilon studies that
// compare the fast-switching system with the aggregated averaged one.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mfswitch/aggregation.hpp"
#include "mfswitch/dynamics.hpp"
#include "mfswitch/stats.hpp"
#include "mfswitch/test_functions.hpp"

namespace mfswitch {

/// Factor s with s s' = a: Cholesky when a is positive definite, otherwise
/// the symmetric square root with eigenvalues in [-1e-12, 0) clipped to 0.
/// Throws NotSymmetric, IndefiniteBeyondTolerance.
[[nodiscard]] Eigen::MatrixXd matrix_sqrt_spd(const Eigen::MatrixXd& a);

/// bbar(x, mu, i) = sum_j nu_ij b(x, mu, s_ij) and abar likewise; the
/// diffusion factor is matrix_sqrt_spd(abar). Regimes are block indices.
class AveragedModel final : public CoefficientModel {
 public:
  /// Throws DimensionMismatch when the model's regime count is not the
  /// number of flat states.
  AveragedModel(ModelPtr base, AggregationResult aggregation);

  [[nodiscard]] std::string name() const override;
  [[nodiscard]] std::size_t dim() const override { return base_->dim(); }
  [[nodiscard]] std::size_t regimes() const override { return aggregation_.partition.blocks(); }
  [[nodiscard]] ModelConstants constants() const override { return base_->constants(); }

  void drift(std::span<const double> x, const MeasureView& mu, int regime, std::span<double> out) const override;
  void diffusion(std::span<const double> x, const MeasureView& mu, int regime, std::span<double> out) const override;
  void diffusion_squared(std::span<const double> x, const MeasureView& mu, int regime,
                         std::span<double> out) const override;

  [[nodiscard]] const CoefficientModel& base() const noexcept { return *base_; }
  [[nodiscard]] const AggregationResult& aggregation() const noexcept { return aggregation_; }
  /// sum_j nu_ij g(s_ij) into out[0, n), with g evaluated into scratch.
  template <class Eval>
  void average(int block, std::size_t n, std::span<double> scratch, std::span<double> out, Eval&& eval) const;

 private:
  struct Member {
    int flat;
    double weight;
  };

  ModelPtr base_;
  AggregationResult aggregation_;
  std::vector<std::vector<Member>> members_;  ///< nonzero-weight states of each block
};

template <class Eval>
void AveragedModel::average(int block, std::size_t n, std::span<double> scratch, std::span<double> out,
                            Eval&& eval) const {
  if (block < 0 || static_cast<std::size_t>(block) >= members_.size()) check_regime(block);
  for (std::size_t k = 0; k < n; ++k) out[k] = 0.0;
  for (const Member& m : members_[static_cast<std::size_t>(block)]) {
    eval(m.flat, scratch.first(n));
    for (std::size_t k = 0; k < n; ++k) out[k] += m.weight * scratch[k];
  }
}

[[nodiscard]] std::shared_ptr<const AveragedModel> average_coefficients(ModelPtr model,
                                                                        const AggregationResult& aggregation);

/// Deliberately wrong averaging kept as a control: sigma_c = sum_j nu_ij
/// sigma(., s_ij) and a_c = sigma_c sigma_c'. The drift is averaged as usual.
[[nodiscard]] ModelPtr sigma_averaged_model(ModelPtr model, const AggregationResult& aggregation);

/// Online
///   int_0^t <mu, L^eps(mu) f(., a(u-))> du - int_0^t <mu, Lbar(mu) f(., abar(u-))> du,
/// where L^eps carries Q^eps over flat states and Lbar carries Qbar over
/// blocks; the observed regime is the flat one and its block is looked up.
class OperatorResidualAccumulator final : public StepObserver {
 public:
  OperatorResidualAccumulator(const CoefficientModel& model, const AveragedModel& averaged,
                              const GeneratorMatrix& q_eps, const GeneratorMatrix& q_bar,
                              const TestFunctionBundle& f);

  void observe(double t, const EmpiricalMeasure& mu, const MeasureView& view, int regime) override;

  [[nodiscard]] double value() const noexcept { return value_; }
  [[nodiscard]] double time() const noexcept { return last_time_; }

 private:
  double integrand(const EmpiricalMeasure& mu, const MeasureView& view, int flat) const;

  const CoefficientModel& model_;
  const AveragedModel& averaged_;
  const GeneratorMatrix& q_eps_;
  const GeneratorMatrix& q_bar_;
  const TestFunctionBundle& f_;
  bool started_ = false;
  double last_time_ = 0.0;
  double last_integrand_ = 0.0;
  double value_ = 0.0;
};

/// Residual from a dense trajectory. Throws PathMismatch unless agg_path is
/// the projection of fast; CheckpointMissing and TimeNotOnGrid as for the
/// martingale residual.
[[nodiscard]] double operator_residual(const TrajectoryRecord& traj, const SwitchingPath& fast,
                                       const SwitchingPath& agg_path, const CoefficientModel& model,
                                       const AveragedModel& averaged, const GeneratorMatrix& q_eps,
                                       const GeneratorMatrix& q_bar, const TestFunctionBundle& f, double t);

struct TwoScaleExperimentSpec {
  TwoScaleSpec chain;  ///< its epsilon is replaced by each entry of epsilons
  ModelPtr model;
  std::size_t particles = 512;
  std::vector<double> epsilons;  ///< positive, strictly decreasing
  double horizon = 1.0;
  /// Step of the averaged runs. Fast runs at eps use min(dt, eps / 10) unless
  /// fast_dt gives an explicit step, which must then satisfy dt <= eps / 10.
  double dt = 1e-3;
  std::vector<double> fast_dt;
  std::size_t replicas = 200;
  std::vector<TestFunctionBundle> functions;  ///< compared at T; psi when empty
  TestFunctionBundle residual_function;       ///< for the operator residual; psi when id is empty
  int initial_state = 0;                      ///< flat state of the fast chain at t = 0
  InitialCondition initial;
  std::uint64_t seed = 0;
  bool control = true;               ///< also run the sigma-averaged control
  std::vector<double> moment_times;  ///< <mu, psi> tracked here in every run

  /// Throws ConfigInvalid, DimensionMismatch.
  void validate() const;
  [[nodiscard]] double fast_step(std::size_t k) const;
};

struct TwoScaleReplica {
  std::vector<std::vector<double>> fast;  ///< [eps][function] <mu^eps(T), f>
  std::vector<double> operator_residual;  ///< [eps], signed value at T
  std::vector<double> averaged;           ///< [function]
  std::vector<double> control;            ///< [function], empty without control
  std::vector<std::vector<double>> moments;  ///< [run][time]: eps runs, averaged, control
};

[[nodiscard]] TwoScaleReplica two_scale_replica(const TwoScaleExperimentSpec& spec, std::size_t replica);

struct TwoScaleRow {
  double epsilon = 0.0;
  std::string function;
  SampleSummary fast;
  SampleSummary averaged;
  SampleSummary control;
  double difference = 0.0;  ///< |fast mean - averaged mean|
  double difference_se = 0.0;
  double control_gap = 0.0;  ///< |fast mean - control mean|
  double control_gap_se = 0.0;
  SampleSummary residual_abs;  ///< E|operator residual(T)|
};

struct TwoScaleTable {
  std::vector<TwoScaleRow> rows;  ///< eps-major, then function
};

[[nodiscard]] TwoScaleTable summarize_two_scale(const TwoScaleExperimentSpec& spec,
                                                const std::vector<TwoScaleReplica>& replicas);

[[nodiscard]] TwoScaleTable two_scale_experiment(const TwoScaleExperimentSpec& spec);

/// Chain-only occupation study: E|occupation_residual(T)| per eps.
struct OccupationSpec {
  TwoScaleSpec chain;
  std::vector<double> epsilons;
  double horizon = 1.0;
  std::size_t replicas = 200;
  int initial_state = 0;
  int flat_state = 0;  ///< state s_ij whose residual is measured
  std::uint64_t seed = 0;

  void validate() const;
};

/// Signed residual per eps for one replica.
[[nodiscard]] std::vector<double> occupation_replica(const OccupationSpec& spec, std::size_t replica);

struct OccupationCurve {
  std::vector<double> epsilons;
  std::vector<SampleSummary> abs_residual;
  RateFit fit;
  bool fitted = false;
};

[[nodiscard]] OccupationCurve summarize_occupation(const OccupationSpec& spec,
                                                   const std::vector<std::vector<double>>& replicas);

}  // namespace mfswitch
