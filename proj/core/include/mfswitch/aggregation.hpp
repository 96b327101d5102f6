#pragma once

// Nearly decomposable chains: Q^eps = Qtilde / eps + Qhat with
// Qtilde = diag(Qtilde^1, ..., Qtilde^l), the aggregated generator
// Qbar = nutilde * Qhat * 1, and lumping of paths onto block indices.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "mfswitch/chain.hpp"

namespace mfswitch {

/// Flat state s <-> (block i, index j within block). Blocks are laid out
/// consecutively: block 0 owns flat states [0, m_1), block 1 the next m_2, ...
class Partition {
 public:
  explicit Partition(std::vector<std::size_t> block_sizes);

  /// One singleton block per state.
  [[nodiscard]] static Partition identity(std::size_t states);

  [[nodiscard]] std::size_t blocks() const noexcept { return sizes_.size(); }
  [[nodiscard]] std::size_t states() const noexcept { return block_of_.size(); }
  [[nodiscard]] std::size_t block_size(std::size_t block) const { return sizes_.at(block); }
  [[nodiscard]] std::size_t offset(std::size_t block) const { return offsets_.at(block); }
  [[nodiscard]] int block_of(int flat) const;
  [[nodiscard]] int index_in_block(int flat) const;
  [[nodiscard]] int flat(std::size_t block, std::size_t index) const;
  [[nodiscard]] const std::vector<std::size_t>& block_sizes() const noexcept { return sizes_; }

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> offsets_;
  std::vector<int> block_of_;
};

class TwoScaleSpec {
 public:
  /// One single-state block, zero slow part, eps = 1.
  TwoScaleSpec();

  /// Throws DimensionMismatch when Qhat is not m0 x m0 with m0 = sum of block
  /// sizes, NonFiniteEntry, ConfigInvalid for eps <= 0 or Qhat rows that do
  /// not sum to zero. Qhat itself need not be a generator.
  TwoScaleSpec(std::vector<GeneratorMatrix> blocks, Eigen::MatrixXd slow, double epsilon);

  [[nodiscard]] const std::vector<GeneratorMatrix>& blocks() const noexcept { return blocks_; }
  [[nodiscard]] const Eigen::MatrixXd& slow() const noexcept { return slow_; }
  [[nodiscard]] double epsilon() const noexcept { return epsilon_; }
  [[nodiscard]] const Partition& partition() const noexcept { return partition_; }
  [[nodiscard]] std::size_t states() const noexcept { return partition_.states(); }

  [[nodiscard]] TwoScaleSpec with_epsilon(double epsilon) const;

 private:
  std::vector<GeneratorMatrix> blocks_;
  Eigen::MatrixXd slow_;
  double epsilon_;
  Partition partition_;
};

struct AggregationResult {
  std::vector<Eigen::RowVectorXd> nus;  ///< stationary row of each block
  Eigen::MatrixXd nu_tilde;             ///< l x m0 block-diagonal stack of the nus
  GeneratorMatrix q_bar;                ///< l x l aggregated generator
  Partition partition;

  /// Stationary weight of a flat state within its block.
  [[nodiscard]] double weight(int flat) const;
};

/// Q^eps = Qtilde / eps + Qhat in flat indexing. Throws InvalidCombination
/// if an off-diagonal entry is negative.
[[nodiscard]] GeneratorMatrix build_fast_generator(const TwoScaleSpec& spec);

/// Stationary rows per block and Qbar = nutilde * Qhat * 1. Throws NotUnique
/// if a block has more than one closed class.
[[nodiscard]] AggregationResult aggregate(const TwoScaleSpec& spec);

/// Lumps a flat path onto block indices, merging repeated blocks.
/// Throws UnknownState for states outside the partition.
[[nodiscard]] SwitchingPath project_path(const SwitchingPath& path, const Partition& partition);

/// Integral over [0, T] of 1(fast = s) - nu_s 1(agg = block(s)), exact from
/// the jump lists. Throws PathMismatch unless agg == project_path(fast).
[[nodiscard]] double occupation_residual(const SwitchingPath& fast, const SwitchingPath& agg,
                                         const AggregationResult& aggregation, int flat_state,
                                         double horizon);

}  // namespace mfswitch
