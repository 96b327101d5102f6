#include "mfswitch/stats.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "mfswitch/error.hpp"

namespace mfswitch {

SampleSummary summarize(std::span<const double> values) {
  SampleSummary s;
  s.count = values.size();
  if (s.count == 0) return s;
  double sum = 0.0;
  for (const double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.count);
  if (s.count > 1) {
    double ss = 0.0;
    for (const double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(s.count - 1));
    s.se = s.sd / std::sqrt(static_cast<double>(s.count));
  }
  return s;
}

double sample_covariance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::DimensionMismatch, "covariance inputs differ in length");
  if (a.size() < 2) return 0.0;
  const double ma = summarize(a).mean;
  const double mb = summarize(b).mean;
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - ma) * (b[i] - mb);
  return acc / static_cast<double>(a.size() - 1);
}

RateFit fit_rate(std::span<const double> scale, std::span<const double> value, double confidence) {
  if (scale.size() != value.size()) throw Error(ErrorKind::DimensionMismatch, "scale and value lists differ");
  if (scale.size() < 3) {
    throw Error(ErrorKind::TooFewPoints, "rate fit needs at least 3 points, got " + std::to_string(scale.size()));
  }
  const std::size_t n = scale.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(scale[i] > 0.0) || !(value[i] > 0.0)) {
      std::ostringstream os;
      os << "point " << i << " = (" << scale[i] << ", " << value[i] << ") is not positive";
      throw Error(ErrorKind::NonPositiveValue, os.str());
    }
    lx[i] = std::log(scale[i]);
    ly[i] = std::log(value[i]);
  }
  const double mx = summarize(lx).mean;
  const double my = summarize(ly).mean;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) throw Error(ErrorKind::TooFewPoints, "rate fit needs at least two distinct scales");
  RateFit fit;
  fit.points = n;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - fit.intercept - fit.slope * lx[i];
    rss += r * r;
  }
  const auto dof = static_cast<double>(n - 2);
  fit.slope_se = std::sqrt(rss / dof / sxx);
  const boost::math::students_t dist(dof);
  const double t = boost::math::quantile(boost::math::complement(dist, (1.0 - confidence) / 2.0));
  fit.ci_low = fit.slope - t * fit.slope_se;
  fit.ci_high = fit.slope + t * fit.slope_se;
  return fit;
}

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const auto n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_pvalue(double statistic, std::size_t n) {
  const double rn = std::sqrt(static_cast<double>(n));
  const double lambda = (rn + 0.12 + 0.11 / rn) * statistic;
  if (lambda < 0.2) return 1.0;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    p += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace mfswitch
