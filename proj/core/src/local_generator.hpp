#pragma once

#include <span>
#include <vector>

#include "mfswitch/models.hpp"
#include "mfswitch/test_functions.hpp"

namespace mfswitch::detail {

/// Scratch space for evaluating b'grad f + (1/2) tr(a hess f) at many points
/// without allocating.
class LocalGenerator {
 public:
  explicit LocalGenerator(std::size_t dim) : d_(dim), b_(dim), a_(dim * dim), g_(dim), h_(dim * dim) {}

  /// Returns the diffusion-generator value; if `energy` is set, also stores
  /// (a grad f) . grad f there.
  double apply(const CoefficientModel& model, const TestFunctionBundle& f, std::span<const double> x,
               const MeasureView& mu, int regime, double* energy = nullptr) {
    model.drift(x, mu, regime, b_);
    model.diffusion_squared(x, mu, regime, a_);
    f.gradient(x, regime, g_);
    f.hessian(x, regime, h_);
    double first = 0.0;
    double second = 0.0;
    double quad = 0.0;
    for (std::size_t i = 0; i < d_; ++i) {
      first += b_[i] * g_[i];
      for (std::size_t j = 0; j < d_; ++j) {
        second += a_[i * d_ + j] * h_[j * d_ + i];
        quad += a_[i * d_ + j] * g_[i] * g_[j];
      }
    }
    if (energy != nullptr) *energy = quad;
    return first + 0.5 * second;
  }

 private:
  std::size_t d_;
  std::vector<double> b_, a_, g_, h_;
};

}  // namespace mfswitch::detail
