#include "mfswitch/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mfswitch/error.hpp"

namespace mfswitch {

MeasureView view_of(const EmpiricalMeasure& mu) {
  MeasureView v;
  v.measure = &mu;
  v.mean.assign(mu.dim(), 0.0);
  for (std::size_t k = 0; k < mu.size(); ++k) {
    const double w = mu.weight(k);
    const auto x = mu.atom(k);
    for (std::size_t c = 0; c < mu.dim(); ++c) v.mean[c] += w * x[c];
  }
  return v;
}

void CoefficientModel::diffusion_squared(std::span<const double> x, const MeasureView& mu, int regime,
                                         std::span<double> out) const {
  const std::size_t d = dim();
  std::vector<double> s(d * d);
  diffusion(x, mu, regime, s);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < d; ++k) acc += s[i * d + k] * s[j * d + k];
      out[i * d + j] = acc;
    }
  }
}

void CoefficientModel::check_regime(int regime) const {
  if (regime < 0 || static_cast<std::size_t>(regime) >= regimes()) {
    throw Error(ErrorKind::UnknownState,
                name() + " has no regime " + std::to_string(regime));
  }
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::ConfigInvalid, what);
}

void require_finite_nonnegative(const std::vector<double>& v, const std::string& what) {
  for (const double x : v) require(std::isfinite(x) && x >= 0.0, what + " must be finite and nonnegative");
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (const double x : v) m = std::max(m, std::abs(x));
  return m;
}

void fill_scaled_identity(std::span<double> out, std::size_t d, double s) {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < d; ++i) out[i * d + i] = s;
}

class MeanReverting final : public CoefficientModel {
 public:
  explicit MeanReverting(MeanRevertingParams p) : p_(std::move(p)) {
    const std::size_t m = p_.interaction.size();
    require(p_.dim >= 1, "model dimension must be positive");
    require(m >= 1, "mean-reverting model needs at least one regime");
    if (p_.confinement.empty()) p_.confinement.assign(m, 0.0);
    if (p_.shift.empty()) p_.shift.assign(m, 0.0);
    require(p_.confinement.size() == m && p_.shift.size() == m && p_.noise.size() == m,
            "mean-reverting parameters need one entry per regime");
    require_finite_nonnegative(p_.interaction, "interaction");
    require_finite_nonnegative(p_.confinement, "confinement");
    require_finite_nonnegative(p_.noise, "noise");
    for (const double c : p_.shift) require(std::isfinite(c), "shift must be finite");
  }

  std::string name() const override { return "mean-reverting-switch"; }
  std::size_t dim() const override { return p_.dim; }
  std::size_t regimes() const override { return p_.interaction.size(); }

  ModelConstants constants() const override {
    const double a = max_abs(p_.interaction);
    const double k = max_abs(p_.confinement);
    const double c = max_abs(p_.shift) * std::sqrt(static_cast<double>(p_.dim));
    return {a + k, std::max(a + k, c), max_abs(p_.noise)};
  }

  void drift(std::span<const double> x, const MeasureView& mu, int regime, std::span<double> out) const override {
    const auto r = at(regime);
    const double a = p_.interaction[r];
    const double k = p_.confinement[r];
    const double c = p_.shift[r];
    for (std::size_t i = 0; i < p_.dim; ++i) out[i] = a * (mu.mean[i] - x[i]) - k * x[i] + c;
  }

  void diffusion(std::span<const double>, const MeasureView&, int regime, std::span<double> out) const override {
    fill_scaled_identity(out, p_.dim, p_.noise[at(regime)]);
  }

  void diffusion_squared(std::span<const double>, const MeasureView&, int regime,
                         std::span<double> out) const override {
    const double s = p_.noise[at(regime)];
    fill_scaled_identity(out, p_.dim, s * s);
  }

 private:
  std::size_t at(int regime) const {
    const auto r = static_cast<std::size_t>(regime);
    if (r >= p_.noise.size()) check_regime(regime);
    return r;
  }

  MeanRevertingParams p_;
};

class KernelInteraction final : public CoefficientModel {
 public:
  explicit KernelInteraction(KernelInteractionParams p) : p_(std::move(p)) {
    require(p_.dim >= 1, "model dimension must be positive");
    require(!p_.strength.empty(), "kernel model needs at least one regime");
    require(p_.noise.size() == p_.strength.size(), "kernel parameters need one entry per regime");
    for (const double k : p_.strength) require(std::isfinite(k), "strength must be finite");
    require_finite_nonnegative(p_.noise, "noise");
  }

  std::string name() const override { return "kernel-interaction"; }
  std::size_t dim() const override { return p_.dim; }
  std::size_t regimes() const override { return p_.strength.size(); }

  ModelConstants constants() const override {
    const double kappa = max_abs(p_.strength);
    const double rd = std::sqrt(static_cast<double>(p_.dim));
    return {kappa * std::max(1.0, rd * std::numbers::pi / 2.0), kappa * rd * std::numbers::pi / 2.0,
            max_abs(p_.noise)};
  }

  void drift(std::span<const double> x, const MeasureView& mu, int regime, std::span<double> out) const override {
    const double kappa = p_.strength[at(regime)];
    std::fill(out.begin(), out.end(), 0.0);
    const EmpiricalMeasure& m = *mu.measure;
    for (std::size_t j = 0; j < m.size(); ++j) {
      const auto y = m.atom(j);
      const double w = m.weight(j);
      for (std::size_t c = 0; c < p_.dim; ++c) out[c] += w * std::atan(y[c] - x[c]);
    }
    for (auto& v : out) v *= kappa;
  }

  void diffusion(std::span<const double>, const MeasureView&, int regime, std::span<double> out) const override {
    fill_scaled_identity(out, p_.dim, p_.noise[at(regime)]);
  }

  void diffusion_squared(std::span<const double>, const MeasureView&, int regime,
                         std::span<double> out) const override {
    const double s = p_.noise[at(regime)];
    fill_scaled_identity(out, p_.dim, s * s);
  }

 private:
  std::size_t at(int regime) const {
    const auto r = static_cast<std::size_t>(regime);
    if (r >= p_.noise.size()) check_regime(regime);
    return r;
  }

  KernelInteractionParams p_;
};

}  // namespace

ModelPtr make_mean_reverting(MeanRevertingParams params) {
  return std::make_shared<const MeanReverting>(std::move(params));
}

ModelPtr make_kernel_interaction(KernelInteractionParams params) {
  return std::make_shared<const KernelInteraction>(std::move(params));
}

}  // namespace mfswitch
