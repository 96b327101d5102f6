#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mfswitch::detail {

/// Signed combined support of two measures: atom k sits at
/// points[k*dim, (k+1)*dim) and carries mu-weight minus eta-weight.
struct SignedSupport {
  std::size_t dim = 1;
  std::vector<double> points;
  std::vector<double> charge;

  [[nodiscard]] std::size_t size() const noexcept { return charge.size(); }
};

/// max sum_k c_k f_k  s.t.  |f_k| <= 1,  |f_k - f_l| <= |x_k - x_l|,
/// for points on the line sorted strictly increasing.
[[nodiscard]] double bl_chain_1d(std::span<const double> sorted_points, std::span<const double> charge);

struct SimplexOutcome {
  double value = 0.0;
  double primal_objective = 0.0;
  std::vector<double> potentials;
  std::size_t iterations = 0;
  std::size_t active_arcs = 0;
};

/// Same LP for any dimension, solved as its flow-form dual by a dense revised
/// simplex with Bland's rule; pair constraints enter lazily.
[[nodiscard]] SimplexOutcome bl_simplex(const SignedSupport& support, std::size_t initial_neighbors,
                                        std::size_t max_iterations);

}  // namespace mfswitch::detail
