#include "mfswitch/test_functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mfswitch/error.hpp"

namespace mfswitch {

std::function<double(std::span<const double>)> TestFunctionBundle::at(int regime) const {
  return [f = value, regime](std::span<const double> x) { return f(x, regime); };
}

TestFunctionBundle constant_function(std::size_t dim, double c) {
  TestFunctionBundle f;
  std::ostringstream id;
  id << "const(" << c << ")";
  f.id = id.str();
  f.dim = dim;
  f.value = [c](std::span<const double>, int) { return c; };
  f.gradient = [](std::span<const double>, int, std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); };
  f.hessian = [](std::span<const double>, int, std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); };
  f.bound = std::abs(c);
  f.lipschitz = 0.0;
  return f;
}

TestFunctionBundle coordinate_function(std::size_t dim, std::size_t k) {
  if (k >= dim) throw Error(ErrorKind::ConfigInvalid, "coordinate index outside the dimension");
  TestFunctionBundle f;
  f.id = "x" + std::to_string(k);
  f.dim = dim;
  f.value = [k](std::span<const double> x, int) { return x[k]; };
  f.gradient = [k](std::span<const double>, int, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    out[k] = 1.0;
  };
  f.hessian = [](std::span<const double>, int, std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); };
  f.bound = std::numeric_limits<double>::infinity();
  f.lipschitz = 1.0;
  return f;
}

TestFunctionBundle psi_function(std::size_t dim) {
  TestFunctionBundle f;
  f.id = "psi";
  f.dim = dim;
  f.value = [](std::span<const double> x, int) {
    double s = 0.0;
    for (const double c : x) s += c * c;
    return s;
  };
  f.gradient = [](std::span<const double> x, int, std::span<double> out) {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = 2.0 * x[i];
  };
  f.hessian = [dim](std::span<const double>, int, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < dim; ++i) out[i * dim + i] = 2.0;
  };
  f.bound = std::numeric_limits<double>::infinity();
  f.lipschitz = std::numeric_limits<double>::infinity();
  return f;
}

namespace {

struct Bump {
  std::size_t dim;
  std::vector<double> centres;
  double radius;
  double amplitude;

  std::span<const double> centre(int regime) const {
    const std::size_t count = centres.size() / dim;
    const std::size_t r = count == 1 ? 0 : static_cast<std::size_t>(regime);
    if (regime < 0 || r >= count) {
      throw Error(ErrorKind::UnknownState, "bump has no centre for regime " + std::to_string(regime));
    }
    return {centres.data() + r * dim, dim};
  }

  // u = |x - c|^2 / rho^2 and the offset x - c.
  double offset(std::span<const double> x, int regime, std::span<double> diff) const {
    const auto c = centre(regime);
    double u = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      diff[i] = x[i] - c[i];
      u += diff[i] * diff[i];
    }
    return u / (radius * radius);
  }
};

// Largest |grad f| for the radial profile, by a fine scan of t = r / rho.
double bump_lipschitz(double radius, double amplitude) {
  double best = 0.0;
  for (int k = 1; k < 20000; ++k) {
    const double t = k / 20000.0;
    const double u = t * t;
    const double g = std::exp(1.0 - 1.0 / (1.0 - u));
    best = std::max(best, g / ((1.0 - u) * (1.0 - u)) * 2.0 * t / radius);
  }
  return amplitude * best;
}

}  // namespace

TestFunctionBundle bump_function(std::size_t dim, std::vector<double> centres, double radius, double amplitude) {
  if (dim == 0 || centres.empty() || centres.size() % dim != 0) {
    throw Error(ErrorKind::ConfigInvalid, "bump centres must be a nonempty list of points");
  }
  if (!(radius > 0.0) || !std::isfinite(radius) || !std::isfinite(amplitude)) {
    throw Error(ErrorKind::ConfigInvalid, "bump radius must be positive and finite");
  }
  auto b = std::make_shared<const Bump>(Bump{dim, std::move(centres), radius, amplitude});
  TestFunctionBundle f;
  std::ostringstream id;
  id << "bump(r=" << radius << ")";
  f.id = id.str();
  f.dim = dim;
  f.value = [b](std::span<const double> x, int regime) {
    const auto c = b->centre(regime);
    double u = 0.0;
    for (std::size_t i = 0; i < b->dim; ++i) u += (x[i] - c[i]) * (x[i] - c[i]);
    u /= b->radius * b->radius;
    if (u >= 1.0) return 0.0;
    return b->amplitude * std::exp(1.0 - 1.0 / (1.0 - u));
  };
  f.gradient = [b](std::span<const double> x, int regime, std::span<double> out) {
    const double u = b->offset(x, regime, out);
    if (u >= 1.0) {
      std::fill(out.begin(), out.end(), 0.0);
      return;
    }
    const double v = 1.0 - u;
    const double g = std::exp(1.0 - 1.0 / v);
    const double scale = b->amplitude * (-g / (v * v)) * 2.0 / (b->radius * b->radius);
    for (auto& c : out) c *= scale;
  };
  f.hessian = [b](std::span<const double> x, int regime, std::span<double> out) {
    const std::size_t d = b->dim;
    double local[8];
    std::vector<double> heap;
    std::span<double> diff(local, d);
    if (d > 8) {
      heap.resize(d);
      diff = heap;
    }
    const double u = b->offset(x, regime, diff);
    std::fill(out.begin(), out.end(), 0.0);
    if (u >= 1.0) return;
    const double v = 1.0 - u;
    const double g = std::exp(1.0 - 1.0 / v);
    const double g1 = -g / (v * v);
    const double g2 = g * (2.0 * u - 1.0) / (v * v * v * v);
    const double r2 = b->radius * b->radius;
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        double h = g2 * (2.0 * diff[i] / r2) * (2.0 * diff[j] / r2);
        if (i == j) h += g1 * 2.0 / r2;
        out[i * d + j] = b->amplitude * h;
      }
    }
  };
  f.bound = std::abs(amplitude);
  f.lipschitz = bump_lipschitz(radius, std::abs(amplitude));
  return f;
}

TestFunctionBundle linear_combination(double a, const TestFunctionBundle& f, double b, const TestFunctionBundle& g) {
  if (f.dim != g.dim) throw Error(ErrorKind::DimensionMismatch, "test functions have different dimensions");
  TestFunctionBundle h;
  std::ostringstream id;
  id << a << "*" << f.id << "+" << b << "*" << g.id;
  h.id = id.str();
  h.dim = f.dim;
  h.value = [a, b, fv = f.value, gv = g.value](std::span<const double> x, int i) { return a * fv(x, i) + b * gv(x, i); };
  h.gradient = [a, b, fg = f.gradient, gg = g.gradient](std::span<const double> x, int i, std::span<double> out) {
    std::vector<double> tmp(out.size());
    fg(x, i, out);
    gg(x, i, tmp);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = a * out[k] + b * tmp[k];
  };
  h.hessian = [a, b, fh = f.hessian, gh = g.hessian](std::span<const double> x, int i, std::span<double> out) {
    std::vector<double> tmp(out.size());
    fh(x, i, out);
    gh(x, i, tmp);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = a * out[k] + b * tmp[k];
  };
  h.bound = std::abs(a) * f.bound + std::abs(b) * g.bound;
  h.lipschitz = std::abs(a) * f.lipschitz + std::abs(b) * g.lipschitz;
  return h;
}

}  // namespace mfswitch
