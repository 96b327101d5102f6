#pragma once

// Coefficient models b(x, mu, i), sigma(x, mu, i) for the switched mean-field
// system and the two built-in families.

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mfswitch/measure.hpp"

namespace mfswitch {

/// What a model may read from the current empirical measure. The mean is
/// precomputed once per step; the full measure is there for kernel models.
struct MeasureView {
  const EmpiricalMeasure* measure = nullptr;
  std::vector<double> mean;
};

[[nodiscard]] MeasureView view_of(const EmpiricalMeasure& mu);

struct ModelConstants {
  double lipschitz = 0.0;       ///< L in |b(x,mu,i) - b(y,eta,i)| <= L(|x-y| + ||mu-eta||_BL)
  double growth = 0.0;          ///< C in |b(x,mu,i)| <= C(1 + |x| + <mu, phi>)
  double diffusion_bound = 0.0; ///< sup of the operator norm of sigma
};

class CoefficientModel {
 public:
  virtual ~CoefficientModel() = default;

  [[nodiscard]] virtual std::string name() const = 0;
  [[nodiscard]] virtual std::size_t dim() const = 0;
  [[nodiscard]] virtual std::size_t regimes() const = 0;
  [[nodiscard]] virtual ModelConstants constants() const = 0;

  /// b(x, mu, regime), d entries.
  virtual void drift(std::span<const double> x, const MeasureView& mu, int regime,
                     std::span<double> out) const = 0;
  /// sigma(x, mu, regime), d*d entries row-major.
  virtual void diffusion(std::span<const double> x, const MeasureView& mu, int regime,
                         std::span<double> out) const = 0;
  /// a = sigma sigma', d*d entries row-major.
  virtual void diffusion_squared(std::span<const double> x, const MeasureView& mu, int regime,
                                 std::span<double> out) const;

 protected:
  void check_regime(int regime) const;
};

using ModelPtr = std::shared_ptr<const CoefficientModel>;

/// b = a_i (mean(mu) - x) - k_i x + c_i,  sigma = s_i I.
/// The confinement k_i is an optional extra restoring term (zero by default).
struct MeanRevertingParams {
  std::size_t dim = 1;
  std::vector<double> interaction;  ///< a_i >= 0
  std::vector<double> confinement;  ///< k_i >= 0; empty means all zero
  std::vector<double> shift;        ///< c_i, added to every coordinate; empty means zero
  std::vector<double> noise;        ///< s_i >= 0
};

/// b_c = sum_j w_j kappa_i atan(y_{j,c} - x_c),  sigma = s_i I.
struct KernelInteractionParams {
  std::size_t dim = 1;
  std::vector<double> strength;  ///< kappa_i
  std::vector<double> noise;     ///< s_i >= 0
};

/// Throw ConfigInvalid on inconsistent lengths or out-of-range values.
[[nodiscard]] ModelPtr make_mean_reverting(MeanRevertingParams params);
[[nodiscard]] ModelPtr make_kernel_interaction(KernelInteractionParams params);

}  // namespace mfswitch
