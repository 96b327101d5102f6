#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mfswitch/aggregation.hpp"
#include "mfswitch/error.hpp"

namespace mfswitch {

Partition::Partition(std::vector<std::size_t> block_sizes) : sizes_(std::move(block_sizes)) {
  if (sizes_.empty()) throw Error(ErrorKind::ConfigInvalid, "partition needs at least one block");
  std::size_t offset = 0;
  for (std::size_t b = 0; b < sizes_.size(); ++b) {
    if (sizes_[b] == 0) throw Error(ErrorKind::ConfigInvalid, "partition blocks must be nonempty");
    offsets_.push_back(offset);
    for (std::size_t j = 0; j < sizes_[b]; ++j) block_of_.push_back(static_cast<int>(b));
    offset += sizes_[b];
  }
}

Partition Partition::identity(std::size_t states) {
  return Partition(std::vector<std::size_t>(states, 1));
}

int Partition::block_of(int flat) const {
  if (flat < 0 || static_cast<std::size_t>(flat) >= block_of_.size()) {
    throw Error(ErrorKind::UnknownState, "state " + std::to_string(flat) + " has no partition entry");
  }
  return block_of_[static_cast<std::size_t>(flat)];
}

int Partition::index_in_block(int flat) const {
  const int b = block_of(flat);
  return flat - static_cast<int>(offsets_[static_cast<std::size_t>(b)]);
}

int Partition::flat(std::size_t block, std::size_t index) const {
  if (block >= sizes_.size() || index >= sizes_[block]) {
    throw Error(ErrorKind::UnknownState, "block/index pair outside the partition");
  }
  return static_cast<int>(offsets_[block] + index);
}

namespace {

Partition partition_of(const std::vector<GeneratorMatrix>& blocks) {
  std::vector<std::size_t> sizes;
  sizes.reserve(blocks.size());
  for (const auto& b : blocks) sizes.push_back(b.size());
  return Partition(std::move(sizes));
}

}  // namespace

TwoScaleSpec::TwoScaleSpec(std::vector<GeneratorMatrix> blocks, Eigen::MatrixXd slow, double epsilon)
    : blocks_(std::move(blocks)), slow_(std::move(slow)), epsilon_(epsilon), partition_(partition_of(blocks_)) {
  const auto m = static_cast<Eigen::Index>(partition_.states());
  if (slow_.rows() != m || slow_.cols() != m) {
    std::ostringstream os;
    os << "slow generator is " << slow_.rows() << "x" << slow_.cols() << ", blocks need " << m << "x" << m;
    throw Error(ErrorKind::DimensionMismatch, os.str());
  }
  if (!slow_.allFinite()) throw Error(ErrorKind::NonFiniteEntry, "slow generator has non-finite entries");
  for (Eigen::Index i = 0; i < m; ++i) {
    const double sum = slow_.row(i).sum();
    const double scale = std::max(1.0, slow_.row(i).cwiseAbs().sum());
    if (std::abs(sum) > 1e-12 * scale) {
      std::ostringstream os;
      os << "slow generator row " << i << " sums to " << sum << ", expected 0";
      throw Error(ErrorKind::ConfigInvalid, os.str());
    }
  }
  if (!(epsilon_ > 0.0) || !std::isfinite(epsilon_)) {
    throw Error(ErrorKind::ConfigInvalid, "epsilon must be positive and finite");
  }
}

TwoScaleSpec::TwoScaleSpec() : TwoScaleSpec({GeneratorMatrix()}, Eigen::MatrixXd::Zero(1, 1), 1.0) {}

TwoScaleSpec TwoScaleSpec::with_epsilon(double epsilon) const {
  return TwoScaleSpec(blocks_, slow_, epsilon);
}

double AggregationResult::weight(int flat) const {
  const int b = partition.block_of(flat);
  return nus[static_cast<std::size_t>(b)](partition.index_in_block(flat));
}

GeneratorMatrix build_fast_generator(const TwoScaleSpec& spec) {
  const auto m = static_cast<Eigen::Index>(spec.states());
  Eigen::MatrixXd q = spec.slow();
  const auto& part = spec.partition();
  for (std::size_t b = 0; b < spec.blocks().size(); ++b) {
    const auto off = static_cast<Eigen::Index>(part.offset(b));
    const auto size = static_cast<Eigen::Index>(part.block_size(b));
    q.block(off, off, size, size) += spec.blocks()[b].rates() / spec.epsilon();
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      if (i != j && q(i, j) < 0.0) {
        std::ostringstream os;
        os << "Q^eps entry (" << i << "," << j << ") = " << q(i, j) << " at eps = " << spec.epsilon();
        throw Error(ErrorKind::InvalidCombination, os.str());
      }
    }
  }
  return validate_generator(q);
}

AggregationResult aggregate(const TwoScaleSpec& spec) {
  const auto& part = spec.partition();
  const auto l = static_cast<Eigen::Index>(part.blocks());
  const auto m = static_cast<Eigen::Index>(part.states());

  std::vector<Eigen::RowVectorXd> nus;
  nus.reserve(spec.blocks().size());
  Eigen::MatrixXd nu_tilde = Eigen::MatrixXd::Zero(l, m);
  Eigen::MatrixXd ones = Eigen::MatrixXd::Zero(m, l);
  for (std::size_t b = 0; b < spec.blocks().size(); ++b) {
    nus.push_back(stationary_distribution(spec.blocks()[b]));
    const auto off = static_cast<Eigen::Index>(part.offset(b));
    const auto size = static_cast<Eigen::Index>(part.block_size(b));
    nu_tilde.block(static_cast<Eigen::Index>(b), off, 1, size) = nus.back();
    ones.block(off, static_cast<Eigen::Index>(b), size, 1).setOnes();
  }
  const Eigen::MatrixXd q_bar = nu_tilde * spec.slow() * ones;
  return AggregationResult{std::move(nus), std::move(nu_tilde), validate_generator(q_bar), part};
}

SwitchingPath project_path(const SwitchingPath& path, const Partition& partition) {
  std::vector<double> times;
  std::vector<int> states{partition.block_of(path.initial_state())};
  const auto jt = path.jump_times();
  const auto st = path.states();
  for (std::size_t n = 0; n < jt.size(); ++n) {
    const int b = partition.block_of(st[n + 1]);
    if (b != states.back()) {
      times.push_back(jt[n]);
      states.push_back(b);
    }
  }
  return SwitchingPath(path.horizon(), std::move(times), std::move(states));
}

double occupation_residual(const SwitchingPath& fast, const SwitchingPath& agg,
                           const AggregationResult& aggregation, int flat_state, double horizon) {
  if (!(project_path(fast, aggregation.partition) == agg)) {
    throw Error(ErrorKind::PathMismatch, "aggregated path is not the projection of the fast path");
  }
  if (horizon < 0.0 || horizon > fast.horizon()) {
    throw Error(ErrorKind::TimeOutOfRange, "residual horizon outside the path horizon");
  }
  const int block = aggregation.partition.block_of(flat_state);
  const double nu = aggregation.weight(flat_state);
  return fast.occupation(flat_state, 0.0, horizon) - nu * agg.occupation(block, 0.0, horizon);
}

}  // namespace mfswitch
