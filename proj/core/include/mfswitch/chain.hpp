#pragma once

// Continuous-time Markov chains on a finite state space {0, ..., m0-1}:
// generator validation, exact path sampling, transition matrices, and the
// per-pair jump martingales M_ij = [M_ij] - <M_ij>.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mfswitch/random.hpp"

namespace mfswitch {

/// Rate matrix of a CTMC. Off-diagonal entries are nonnegative and every
/// diagonal entry equals minus the off-diagonal row sum, so rows sum to zero.
class GeneratorMatrix {
 public:
  /// The 1x1 zero generator: a single absorbing state.
  GeneratorMatrix() : rates_(Eigen::MatrixXd::Zero(1, 1)), labels_{"0"} {}

  [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(rates_.rows()); }
  [[nodiscard]] const Eigen::MatrixXd& rates() const noexcept { return rates_; }
  [[nodiscard]] double rate(std::size_t from, std::size_t to) const { return rates_(from, to); }
  [[nodiscard]] double exit_rate(std::size_t state) const { return -rates_(state, state); }
  [[nodiscard]] bool absorbing(std::size_t state) const { return exit_rate(state) == 0.0; }
  [[nodiscard]] const std::vector<std::string>& labels() const noexcept { return labels_; }

  friend bool operator==(const GeneratorMatrix& a, const GeneratorMatrix& b) {
    return a.rates_ == b.rates_;
  }

 private:
  friend GeneratorMatrix validate_generator(const Eigen::MatrixXd&, std::vector<std::string>);
  GeneratorMatrix(Eigen::MatrixXd rates, std::vector<std::string> labels)
      : rates_(std::move(rates)), labels_(std::move(labels)) {}

  Eigen::MatrixXd rates_;
  std::vector<std::string> labels_;
};

/// Checks shape, finiteness and off-diagonal signs, then recomputes the
/// diagonal. Labels default to "0", "1", ...
/// Throws NonSquare, NonFiniteEntry or NegativeOffDiagonal (first offender in
/// row-major order).
[[nodiscard]] GeneratorMatrix validate_generator(const Eigen::MatrixXd& rates,
                                                 std::vector<std::string> labels = {});

/// Right-continuous piecewise-constant path with finitely many jumps. The
/// value on [jump_times[n-1], jump_times[n]) is states[n]; states[0] holds on
/// [0, jump_times[0]).
class SwitchingPath {
 public:
  /// Throws ConfigInvalid when the jump list is not strictly increasing in
  /// (0, horizon], sizes disagree, or two consecutive states coincide.
  SwitchingPath(double horizon, std::vector<double> jump_times, std::vector<int> states);

  [[nodiscard]] static SwitchingPath constant(double horizon, int state);

  [[nodiscard]] double horizon() const noexcept { return horizon_; }
  [[nodiscard]] std::span<const double> jump_times() const noexcept { return jump_times_; }
  [[nodiscard]] std::span<const int> states() const noexcept { return states_; }
  [[nodiscard]] std::size_t jump_count() const noexcept { return jump_times_.size(); }
  [[nodiscard]] int initial_state() const noexcept { return states_.front(); }

  /// Path value at t (right-continuous). Throws TimeOutOfRange outside [0, T].
  [[nodiscard]] int value_at(double t) const;
  /// Left limit at t; equals value_at(0) at t = 0.
  [[nodiscard]] int left_limit(double t) const;
  /// Lebesgue measure of {s in [t0, t1) : path(s) = state}.
  [[nodiscard]] double occupation(int state, double t0, double t1) const;
  /// Same path restricted to [0, t].
  [[nodiscard]] SwitchingPath truncated(double t) const;

  friend bool operator==(const SwitchingPath&, const SwitchingPath&) = default;

 private:
  double horizon_;
  std::vector<double> jump_times_;
  std::vector<int> states_;
};

/// Exact event-driven (Gillespie) sample on [0, horizon]. Absorbing states
/// hold forever.
[[nodiscard]] SwitchingPath sample_path(const GeneratorMatrix& q, int initial, double horizon,
                                        RandomStream& rng);

/// P(t) = exp(Q t) by scaling and squaring of a Taylor series.
[[nodiscard]] Eigen::MatrixXd transition_matrix(const GeneratorMatrix& q, double t);

/// Solves nu Q = 0, sum(nu) = 1. Throws NotUnique when the null space of Q'
/// has dimension above one.
[[nodiscard]] Eigen::RowVectorXd stationary_distribution(const GeneratorMatrix& q);

struct MartingaleDecomposition {
  int from = 0;
  int to = 0;
  double time = 0.0;
  std::size_t jumps = 0;     ///< [M](t): number of from->to jumps in (0, t]
  double compensator = 0.0;  ///< <M>(t) = q(from,to) * occupation of `from` on [0, t)
  double martingale = 0.0;   ///< M(t) = [M](t) - <M>(t)
};

/// Evaluates the jump martingale of the ordered pair (from, to) at time t.
/// The diagonal pair is identically zero. Throws TimeOutOfRange.
[[nodiscard]] MartingaleDecomposition martingale_decomposition(const SwitchingPath& path,
                                                               const GeneratorMatrix& q, int from,
                                                               int to, double t);

}  // namespace mfswitch
