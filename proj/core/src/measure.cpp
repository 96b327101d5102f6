#include "mfswitch/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "bl_solvers.hpp"
#include "mfswitch/error.hpp"
#include "mfswitch/random.hpp"

namespace mfswitch {

EmpiricalMeasure::EmpiricalMeasure(std::size_t dim, std::vector<double> coords, std::vector<double> weights)
    : dim_(dim), coords_(std::move(coords)), weights_(std::move(weights)) {
  if (dim_ == 0) throw Error(ErrorKind::ConfigInvalid, "measure dimension must be positive");
  if (coords_.empty() || coords_.size() % dim_ != 0) {
    std::ostringstream os;
    os << coords_.size() << " coordinates do not form atoms of dimension " << dim_;
    throw Error(ErrorKind::ConfigInvalid, os.str());
  }
  for (const double c : coords_) {
    if (!std::isfinite(c)) throw Error(ErrorKind::NonFiniteValue, "atom coordinate is not finite");
  }
  if (weights_.empty()) return;
  if (weights_.size() != size()) {
    throw Error(ErrorKind::ConfigInvalid, "weight count does not match atom count");
  }
  double total = 0.0;
  for (const double w : weights_) {
    if (!std::isfinite(w)) throw Error(ErrorKind::NonFiniteValue, "weight is not finite");
    if (w < 0.0) throw Error(ErrorKind::ConfigInvalid, "weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    std::ostringstream os;
    os.precision(17);
    os << "weights sum to " << total << ", expected 1";
    throw Error(ErrorKind::ConfigInvalid, os.str());
  }
}

EmpiricalMeasure EmpiricalMeasure::uniform(std::size_t dim, std::vector<double> coords) {
  return EmpiricalMeasure(dim, std::move(coords), {});
}

EmpiricalMeasure EmpiricalMeasure::dirac(std::span<const double> point) {
  return EmpiricalMeasure(point.size(), std::vector<double>(point.begin(), point.end()), {});
}

std::vector<double> EmpiricalMeasure::weights() const {
  if (!weights_.empty()) return weights_;
  return std::vector<double>(size(), 1.0 / static_cast<double>(size()));
}

namespace {

std::vector<std::size_t> lexicographic_order(std::span<const double> coords, std::size_t dim) {
  std::vector<std::size_t> order(coords.size() / dim);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(coords.begin() + static_cast<std::ptrdiff_t>(a * dim),
                                        coords.begin() + static_cast<std::ptrdiff_t>((a + 1) * dim),
                                        coords.begin() + static_cast<std::ptrdiff_t>(b * dim),
                                        coords.begin() + static_cast<std::ptrdiff_t>((b + 1) * dim));
  });
  return order;
}

bool same_atom(std::span<const double> coords, std::size_t dim, std::size_t a, std::size_t b) {
  return std::equal(coords.begin() + static_cast<std::ptrdiff_t>(a * dim),
                    coords.begin() + static_cast<std::ptrdiff_t>((a + 1) * dim),
                    coords.begin() + static_cast<std::ptrdiff_t>(b * dim));
}

// Sorted, merged support of mu - eta; atoms whose charges cancel exactly are
// dropped since they do not affect the value.
detail::SignedSupport signed_support(const EmpiricalMeasure& mu, const EmpiricalMeasure& eta) {
  if (mu.dim() != eta.dim()) {
    std::ostringstream os;
    os << "measures live in dimensions " << mu.dim() << " and " << eta.dim();
    throw Error(ErrorKind::DimensionMismatch, os.str());
  }
  const std::size_t d = mu.dim();
  std::vector<double> coords(mu.coords().begin(), mu.coords().end());
  coords.insert(coords.end(), eta.coords().begin(), eta.coords().end());
  std::vector<double> charge;
  charge.reserve(mu.size() + eta.size());
  for (std::size_t k = 0; k < mu.size(); ++k) charge.push_back(mu.weight(k));
  for (std::size_t k = 0; k < eta.size(); ++k) charge.push_back(-eta.weight(k));

  detail::SignedSupport out;
  out.dim = d;
  const auto order = lexicographic_order(coords, d);
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    double c = 0.0;
    while (j < order.size() && same_atom(coords, d, order[i], order[j])) c += charge[order[j++]];
    if (c != 0.0) {
      const auto first = coords.begin() + static_cast<std::ptrdiff_t>(order[i] * d);
      out.points.insert(out.points.end(), first, first + static_cast<std::ptrdiff_t>(d));
      out.charge.push_back(c);
    }
    i = j;
  }
  return out;
}

}  // namespace

EmpiricalMeasure EmpiricalMeasure::merged() const {
  const auto order = lexicographic_order(coords_, dim_);
  EmpiricalMeasure out;
  out.dim_ = dim_;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    double w = 0.0;
    while (j < order.size() && same_atom(coords_, dim_, order[i], order[j])) w += weight(order[j++]);
    const auto first = coords_.begin() + static_cast<std::ptrdiff_t>(order[i] * dim_);
    out.coords_.insert(out.coords_.end(), first, first + static_cast<std::ptrdiff_t>(dim_));
    out.weights_.push_back(w);
    i = j;
  }
  return out;
}

double integrate(const EmpiricalMeasure& mu, const ScalarField& f) {
  double acc = 0.0;
  for (std::size_t k = 0; k < mu.size(); ++k) {
    const double v = f(mu.atom(k));
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::NonFiniteValue, "integrand is not finite at atom " + std::to_string(k));
    }
    acc += mu.weight(k) * v;
  }
  return acc;
}

double moment(const EmpiricalMeasure& mu, MomentKind kind) {
  double acc = 0.0;
  for (std::size_t k = 0; k < mu.size(); ++k) {
    double sq = 0.0;
    for (const double c : mu.atom(k)) sq += c * c;
    acc += mu.weight(k) * (kind == MomentKind::Psi ? sq : std::sqrt(sq));
  }
  return acc;
}

BlExactResult bl_distance_exact_detailed(const EmpiricalMeasure& mu, const EmpiricalMeasure& eta,
                                         const BlOptions& options) {
  const auto support = signed_support(mu, eta);
  BlExactResult result;
  result.method = options.method;
  if (result.method == BlMethod::Auto) {
    result.method = support.dim == 1 ? BlMethod::Chain1d : BlMethod::Simplex;
  }
  if (result.method == BlMethod::Chain1d && support.dim != 1) {
    throw Error(ErrorKind::DimensionNotOne, "chain solver needs d = 1");
  }
  if (support.size() == 0) return result;

  if (result.method == BlMethod::Chain1d) {
    result.value = detail::bl_chain_1d(support.points, support.charge);
    return result;
  }
  if (support.size() > options.support_cap) {
    std::ostringstream os;
    os << "merged support has " << support.size() << " atoms, cap is " << options.support_cap
       << "; use bl_distance_approx";
    throw Error(ErrorKind::SupportTooLarge, os.str());
  }
  auto lp = detail::bl_simplex(support, options.initial_neighbors, options.max_iterations);
  result.value = std::clamp(lp.value, 0.0, 2.0);
  result.support = support.points;
  result.certificate = std::move(lp.potentials);
  result.primal_objective = lp.primal_objective;
  result.iterations = lp.iterations;
  result.active_constraints = lp.active_arcs;
  return result;
}

double bl_distance_exact(const EmpiricalMeasure& mu, const EmpiricalMeasure& eta, const BlOptions& options) {
  return bl_distance_exact_detailed(mu, eta, options).value;
}

double RidgeFunction::operator()(std::span<const double> x) const {
  double proj = 0.0;
  for (std::size_t c = 0; c < direction.size(); ++c) proj += direction[c] * x[c];
  return sign * std::clamp(slope * (proj - offset), -1.0, 1.0);
}

BlApproxResult bl_distance_approx(const EmpiricalMeasure& mu, const EmpiricalMeasure& eta,
                                  std::size_t budget, std::uint64_t seed) {
  const auto support = signed_support(mu, eta);
  const std::size_t d = support.dim;
  BlApproxResult best;
  best.certificate.direction.assign(d, 0.0);
  best.certificate.direction[0] = 1.0;
  if (support.size() == 0) return best;

  double lo = 0.0;
  double hi = 0.0;
  for (std::size_t k = 0; k < support.size(); ++k) {
    double r = 0.0;
    for (std::size_t c = 0; c < d; ++c) r += support.points[k * d + c] * support.points[k * d + c];
    hi = std::max(hi, std::sqrt(r));
  }
  lo = -hi - 1.0;
  hi += 1.0;

  RandomStream rng(seed);
  RidgeFunction f;
  f.direction.resize(d);
  for (std::size_t b = 0; b < budget; ++b) {
    double norm = 0.0;
    do {
      norm = 0.0;
      for (auto& c : f.direction) {
        c = rng.normal();
        norm += c * c;
      }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (auto& c : f.direction) c /= norm;
    f.offset = lo + (hi - lo) * rng.uniform();
    f.slope = rng.uniform() < 0.5 ? 1.0 : rng.uniform_open();
    f.sign = 1.0;

    double g = 0.0;
    for (std::size_t k = 0; k < support.size(); ++k) {
      g += support.charge[k] * f(std::span<const double>(support.points.data() + k * d, d));
    }
    if (std::abs(g) > best.value) {
      best.value = std::abs(g);
      best.certificate = f;
      best.certificate.sign = g < 0.0 ? -1.0 : 1.0;
    }
  }
  best.value = std::min(best.value, 2.0);
  return best;
}

BlDistance bl_distance(const EmpiricalMeasure& mu, const EmpiricalMeasure& eta, const BlOptions& options,
                       std::size_t approx_budget) {
  try {
    return {bl_distance_exact(mu, eta, options), true};
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::SupportTooLarge && e.kind() != ErrorKind::SolverStall) throw;
  }
  return {bl_distance_approx(mu, eta, approx_budget).value, false};
}

double wasserstein1_1d(const EmpiricalMeasure& mu, const EmpiricalMeasure& eta) {
  if (mu.dim() != 1 || eta.dim() != 1) {
    throw Error(ErrorKind::DimensionNotOne, "wasserstein1_1d needs measures on the line");
  }
  const auto support = signed_support(mu, eta);
  double acc = 0.0;
  double cdf_gap = 0.0;
  for (std::size_t k = 0; k + 1 < support.size(); ++k) {
    cdf_gap += support.charge[k];
    acc += std::abs(cdf_gap) * (support.points[k + 1] - support.points[k]);
  }
  return acc;
}

double product_metric_d(const EmpiricalMeasure& mu, int regime_mu, const EmpiricalMeasure& eta,
                        int regime_eta, const BlOptions& options) {
  return bl_distance_exact(mu, eta, options) + (regime_mu == regime_eta ? 0.0 : 1.0);
}

}  // namespace mfswitch
