#pragma once

// Replica statistics: sample summaries, log-log rate fits with confidence
// intervals, and the one-sample Kolmogorov-Smirnov test.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace mfswitch {

struct SampleSummary {
  std::size_t count = 0;
  double mean = 0.0;
  double sd = 0.0;  ///< unbiased
  double se = 0.0;  ///< sd / sqrt(count)
};

[[nodiscard]] SampleSummary summarize(std::span<const double> values);

/// Unbiased sample covariance.
[[nodiscard]] double sample_covariance(std::span<const double> a, std::span<const double> b);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;  ///< of log(value) at log(scale) = 0
  double slope_se = 0.0;
  double ci_low = 0.0;     ///< 95% interval for the slope
  double ci_high = 0.0;
  std::size_t points = 0;
};

/// Least squares on (log scale, log value), Student-t interval with n - 2
/// degrees of freedom. Throws TooFewPoints (< 3), NonPositiveValue,
/// DimensionMismatch.
[[nodiscard]] RateFit fit_rate(std::span<const double> scale, std::span<const double> value,
                               double confidence = 0.95);

/// sup_x |F_n(x) - F(x)|.
[[nodiscard]] double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);

/// Asymptotic p-value of the statistic with Stephens' small-sample correction.
[[nodiscard]] double ks_pvalue(double statistic, std::size_t n);

}  // namespace mfswitch
