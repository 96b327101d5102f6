#include "mfswitch/chain.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mfswitch/error.hpp"

namespace mfswitch {

GeneratorMatrix validate_generator(const Eigen::MatrixXd& rates, std::vector<std::string> labels) {
  if (rates.rows() != rates.cols() || rates.rows() == 0) {
    std::ostringstream os;
    os << "generator must be a nonempty square matrix, got " << rates.rows() << "x" << rates.cols();
    throw Error(ErrorKind::NonSquare, os.str());
  }
  const auto m = rates.rows();
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      if (!std::isfinite(rates(i, j))) {
        std::ostringstream os;
        os << "entry (" << i << "," << j << ") is not finite";
        throw Error(ErrorKind::NonFiniteEntry, os.str());
      }
    }
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      if (i != j && rates(i, j) < 0.0) {
        std::ostringstream os;
        os << "(" << i << "," << j << ") = " << rates(i, j)
           << "; off-diagonal rates must be nonnegative";
        throw Error(ErrorKind::NegativeOffDiagonal, os.str());
      }
    }
  }
  Eigen::MatrixXd q = rates;
  for (Eigen::Index i = 0; i < m; ++i) {
    double off = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (j != i) off += q(i, j);
    }
    q(i, i) = -off;
  }
  if (labels.empty()) {
    labels.reserve(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) labels.push_back(std::to_string(i));
  } else if (labels.size() != static_cast<std::size_t>(m)) {
    throw Error(ErrorKind::DimensionMismatch, "label count does not match generator size");
  }
  return GeneratorMatrix(std::move(q), std::move(labels));
}

SwitchingPath::SwitchingPath(double horizon, std::vector<double> jump_times, std::vector<int> states)
    : horizon_(horizon), jump_times_(std::move(jump_times)), states_(std::move(states)) {
  if (!(horizon_ > 0.0) || !std::isfinite(horizon_)) {
    throw Error(ErrorKind::ConfigInvalid, "path horizon must be positive and finite");
  }
  if (states_.size() != jump_times_.size() + 1) {
    throw Error(ErrorKind::ConfigInvalid, "path needs exactly one more state than jump times");
  }
  double prev = 0.0;
  for (std::size_t n = 0; n < jump_times_.size(); ++n) {
    if (!(jump_times_[n] > prev) || jump_times_[n] > horizon_) {
      throw Error(ErrorKind::ConfigInvalid, "jump times must be strictly increasing in (0, T]");
    }
    if (states_[n] == states_[n + 1]) {
      throw Error(ErrorKind::ConfigInvalid, "consecutive path states must differ");
    }
    prev = jump_times_[n];
  }
  for (const int s : states_) {
    if (s < 0) throw Error(ErrorKind::UnknownState, "path states must be nonnegative");
  }
}

SwitchingPath SwitchingPath::constant(double horizon, int state) {
  return SwitchingPath(horizon, {}, {state});
}

int SwitchingPath::value_at(double t) const {
  if (t < 0.0 || t > horizon_) {
    std::ostringstream os;
    os << "t = " << t << " outside [0, " << horizon_ << "]";
    throw Error(ErrorKind::TimeOutOfRange, os.str());
  }
  const auto it = std::upper_bound(jump_times_.begin(), jump_times_.end(), t);
  return states_[static_cast<std::size_t>(it - jump_times_.begin())];
}

int SwitchingPath::left_limit(double t) const {
  if (t < 0.0 || t > horizon_) {
    std::ostringstream os;
    os << "t = " << t << " outside [0, " << horizon_ << "]";
    throw Error(ErrorKind::TimeOutOfRange, os.str());
  }
  const auto it = std::lower_bound(jump_times_.begin(), jump_times_.end(), t);
  return states_[static_cast<std::size_t>(it - jump_times_.begin())];
}

double SwitchingPath::occupation(int state, double t0, double t1) const {
  t0 = std::max(t0, 0.0);
  t1 = std::min(t1, horizon_);
  double total = 0.0;
  double start = 0.0;
  for (std::size_t n = 0; n <= jump_times_.size(); ++n) {
    const double end = n < jump_times_.size() ? jump_times_[n] : horizon_;
    if (states_[n] == state) {
      const double lo = std::max(start, t0);
      const double hi = std::min(end, t1);
      if (hi > lo) total += hi - lo;
    }
    if (end >= t1) break;
    start = end;
  }
  return total;
}

SwitchingPath SwitchingPath::truncated(double t) const {
  if (!(t > 0.0) || t > horizon_) {
    throw Error(ErrorKind::TimeOutOfRange, "truncation time must lie in (0, T]");
  }
  const auto it = std::upper_bound(jump_times_.begin(), jump_times_.end(), t);
  const auto n = static_cast<std::size_t>(it - jump_times_.begin());
  return SwitchingPath(t, std::vector<double>(jump_times_.begin(), it),
                       std::vector<int>(states_.begin(), states_.begin() + static_cast<long>(n) + 1));
}

SwitchingPath sample_path(const GeneratorMatrix& q, int initial, double horizon, RandomStream& rng) {
  const auto m = static_cast<int>(q.size());
  if (initial < 0 || initial >= m) {
    throw Error(ErrorKind::UnknownState, "initial state outside the generator's state space");
  }
  if (!(horizon > 0.0)) throw Error(ErrorKind::ConfigInvalid, "horizon must be positive");

  std::vector<double> times;
  std::vector<int> states{initial};
  double t = 0.0;
  int current = initial;
  for (;;) {
    const double rate = q.exit_rate(static_cast<std::size_t>(current));
    if (rate <= 0.0) break;
    t += rng.exponential(rate);
    if (t > horizon) break;
    // Next state with probability q(i,j) / rate.
    double u = rng.uniform() * rate;
    int next = -1;
    for (int j = 0; j < m; ++j) {
      if (j == current) continue;
      const double r = q.rate(static_cast<std::size_t>(current), static_cast<std::size_t>(j));
      if (r <= 0.0) continue;
      next = j;
      if (u < r) break;
      u -= r;
    }
    times.push_back(t);
    states.push_back(next);
    current = next;
  }
  return SwitchingPath(horizon, std::move(times), std::move(states));
}

Eigen::MatrixXd transition_matrix(const GeneratorMatrix& q, double t) {
  if (t < 0.0) throw Error(ErrorKind::TimeOutOfRange, "transition time must be nonnegative");
  const auto m = static_cast<Eigen::Index>(q.size());
  const Eigen::MatrixXd a = q.rates() * t;
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Eigen::MatrixXd scaled = a / std::ldexp(1.0, squarings);

  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(m, m);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(m, m);
  for (int k = 1; k <= 40; ++k) {
    term = term * scaled / static_cast<double>(k);
    p += term;
    if (term.cwiseAbs().maxCoeff() < 1e-19) break;
  }
  for (int s = 0; s < squarings; ++s) p = p * p;
  return p;
}

Eigen::RowVectorXd stationary_distribution(const GeneratorMatrix& q) {
  const auto m = static_cast<Eigen::Index>(q.size());
  const double scale = std::max(1.0, q.rates().cwiseAbs().maxCoeff());
  Eigen::FullPivLU<Eigen::MatrixXd> lu(q.rates().transpose() / scale);
  lu.setThreshold(1e-10);
  const auto nullity = m - lu.rank();
  if (nullity != 1) {
    std::ostringstream os;
    os << "null space of Q' has dimension " << nullity << "; stationary distribution not unique";
    throw Error(ErrorKind::NotUnique, os.str());
  }
  Eigen::MatrixXd augmented(m + 1, m);
  augmented.topRows(m) = q.rates().transpose() / scale;
  augmented.row(m).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + 1);
  rhs(m) = 1.0;
  Eigen::VectorXd nu = augmented.colPivHouseholderQr().solve(rhs);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (nu(i) < 0.0) nu(i) = 0.0;
  }
  nu /= nu.sum();
  return nu.transpose();
}

MartingaleDecomposition martingale_decomposition(const SwitchingPath& path, const GeneratorMatrix& q,
                                                 int from, int to, double t) {
  if (t < 0.0 || t > path.horizon()) {
    std::ostringstream os;
    os << "t = " << t << " outside [0, " << path.horizon() << "]";
    throw Error(ErrorKind::TimeOutOfRange, os.str());
  }
  const auto m = static_cast<int>(q.size());
  if (from < 0 || from >= m || to < 0 || to >= m) {
    throw Error(ErrorKind::UnknownState, "pair outside the generator's state space");
  }
  MartingaleDecomposition out;
  out.from = from;
  out.to = to;
  out.time = t;
  if (from == to) return out;

  const auto times = path.jump_times();
  const auto states = path.states();
  for (std::size_t n = 0; n < times.size() && times[n] <= t; ++n) {
    if (states[n] == from && states[n + 1] == to) ++out.jumps;
  }
  out.compensator = q.rate(static_cast<std::size_t>(from), static_cast<std::size_t>(to)) *
                    path.occupation(from, 0.0, t);
  out.martingale = static_cast<double>(out.jumps) - out.compensator;
  return out;
}

}  // namespace mfswitch
