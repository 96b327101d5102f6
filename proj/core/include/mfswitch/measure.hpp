#pragma once

// Finitely supported probability measures on R^d, the pairing <mu, f>,
// bounded-Lipschitz and Wasserstein-1 distances, and the product metric on
// (measures x regimes).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace mfswitch {

/// mu = sum_k w_k delta_{x_k}. Atoms are stored row-major (atom k occupies
/// coords[k*dim, (k+1)*dim)). Uniform measures store no weight vector.
class EmpiricalMeasure {
 public:
  /// Throws ConfigInvalid on shape errors, negative weights or weights not
  /// summing to 1 within 1e-12; NonFiniteValue on non-finite entries.
  EmpiricalMeasure(std::size_t dim, std::vector<double> coords, std::vector<double> weights);

  /// Weights exactly 1/n.
  [[nodiscard]] static EmpiricalMeasure uniform(std::size_t dim, std::vector<double> coords);
  [[nodiscard]] static EmpiricalMeasure dirac(std::span<const double> point);

  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] std::size_t size() const noexcept { return coords_.size() / dim_; }
  [[nodiscard]] bool is_uniform() const noexcept { return weights_.empty(); }
  [[nodiscard]] std::span<const double> coords() const noexcept { return coords_; }
  [[nodiscard]] std::span<const double> atom(std::size_t k) const noexcept {
    return {coords_.data() + k * dim_, dim_};
  }
  [[nodiscard]] double weight(std::size_t k) const noexcept {
    return weights_.empty() ? 1.0 / static_cast<double>(size()) : weights_[k];
  }
  [[nodiscard]] std::vector<double> weights() const;

  /// Lexicographically sorted copy with coincident atoms merged.
  [[nodiscard]] EmpiricalMeasure merged() const;

  friend bool operator==(const EmpiricalMeasure&, const EmpiricalMeasure&) = default;

 private:
  EmpiricalMeasure() = default;

  std::size_t dim_ = 1;
  std::vector<double> coords_;
  std::vector<double> weights_;
};

using ScalarField = std::function<double(std::span<const double>)>;

/// sum_k w_k f(x_k). Throws NonFiniteValue if f is not finite on an atom.
[[nodiscard]] double integrate(const EmpiricalMeasure& mu, const ScalarField& f);

enum class MomentKind { Phi, Psi };  ///< phi(x) = |x|, psi(x) = |x|^2

[[nodiscard]] double moment(const EmpiricalMeasure& mu, MomentKind kind);

enum class BlMethod {
  Auto,     ///< Chain1d when d = 1, Simplex otherwise
  Simplex,  ///< LP on the combined support with lazily added pair constraints
  Chain1d,  ///< exact dynamic program over sorted atoms, d = 1 only
};

struct BlOptions {
  BlMethod method = BlMethod::Auto;
  std::size_t support_cap = 2048;  ///< merged support limit for the simplex path
  std::size_t initial_neighbors = 8;
  std::size_t max_iterations = 5'000'000;
};

struct BlExactResult {
  double value = 0.0;
  BlMethod method = BlMethod::Auto;
  /// Combined merged support and the optimal test-function values on it
  /// (simplex path only; empty for Chain1d).
  std::vector<double> support;
  std::vector<double> certificate;
  double primal_objective = 0.0;  ///< flow-form objective (simplex only)
  std::size_t iterations = 0;
  std::size_t active_constraints = 0;
};

/// sup |<mu - eta, f>| over |f| <= 1, Lip(f) <= 1 (Euclidean), solved exactly
/// on the combined support. Throws SupportTooLarge above the cap on the
/// simplex path, SolverStall if the iteration budget is exhausted,
/// DimensionMismatch for measures of different dimension.
[[nodiscard]] double bl_distance_exact(const EmpiricalMeasure& mu, const EmpiricalMeasure& eta,
                                       const BlOptions& options = {});
[[nodiscard]] BlExactResult bl_distance_exact_detailed(const EmpiricalMeasure& mu,
                                                       const EmpiricalMeasure& eta,
                                                       const BlOptions& options = {});

/// f(x) = sign * clip(slope * (<direction, x> - offset), -1, 1); admissible for
/// the BL class whenever |direction| = 1 and 0 < slope <= 1.
struct RidgeFunction {
  std::vector<double> direction;
  double offset = 0.0;
  double slope = 1.0;
  double sign = 1.0;

  [[nodiscard]] double operator()(std::span<const double> x) const;
};

struct BlApproxResult {
  double value = 0.0;  ///< a certified lower bound on the BL distance
  RidgeFunction certificate;
};

/// Best |<mu - eta, f>| over `budget` random ridge functions drawn from `seed`.
/// Candidates for a smaller budget are a prefix of those for a larger one.
[[nodiscard]] BlApproxResult bl_distance_approx(const EmpiricalMeasure& mu,
                                                const EmpiricalMeasure& eta, std::size_t budget,
                                                std::uint64_t seed = 0x5eed);

struct BlDistance {
  double value = 0.0;
  bool exact = true;
};

/// Exact when the solver accepts the input, otherwise the approximate lower
/// bound flagged as inexact.
[[nodiscard]] BlDistance bl_distance(const EmpiricalMeasure& mu, const EmpiricalMeasure& eta,
                                     const BlOptions& options = {}, std::size_t approx_budget = 2000);

/// W1 between two measures on the line via their distribution functions.
/// Throws DimensionNotOne.
[[nodiscard]] double wasserstein1_1d(const EmpiricalMeasure& mu, const EmpiricalMeasure& eta);

/// ||mu - eta||_BL + 1(i != j).
[[nodiscard]] double product_metric_d(const EmpiricalMeasure& mu, int regime_mu,
                                      const EmpiricalMeasure& eta, int regime_eta,
                                      const BlOptions& options = {});

}  // namespace mfswitch
