// Exact BL distance on the line. With atoms sorted, the adjacent constraints
// |f_{k+1} - f_k| <= x_{k+1} - x_k imply all the others, so the LP is a chain
// and the value function V_k(y) = max { sum_{j<=k} c_j f_j : f_k = y } is a
// concave piecewise-linear function on [-1, 1]. Each step takes the windowed
// maximum of V_k (split at the peak, shift the rising part left and the
// falling part right by the gap) and then adds c_{k+1} y.

#include <algorithm>
#include <vector>

#include "bl_solvers.hpp"

namespace mfswitch::detail {
namespace {

struct Segment {
  double start;
  double slope;
};

// Concave piecewise-linear function on [-1, 1]; segment i spans
// [segments[i].start, segments[i+1].start) and the last one ends at 1.
struct Concave {
  std::vector<Segment> segments;
  double value_at_left = 0.0;

  [[nodiscard]] double end_of(std::size_t i) const {
    return i + 1 < segments.size() ? segments[i + 1].start : 1.0;
  }

  [[nodiscard]] double evaluate(double y) const {
    double v = value_at_left;
    for (std::size_t i = 0; i < segments.size(); ++i) {
      const double lo = segments[i].start;
      if (y <= lo) break;
      const double hi = std::min(end_of(i), y);
      v += segments[i].slope * (hi - lo);
    }
    return v;
  }

  // [first index with slope <= 0, first index with slope < 0]
  [[nodiscard]] std::pair<std::size_t, std::size_t> peak() const {
    std::size_t p = 0;
    while (p < segments.size() && segments[p].slope > 0.0) ++p;
    std::size_t q = p;
    while (q < segments.size() && segments[q].slope >= 0.0) ++q;
    return {p, q};
  }

  [[nodiscard]] double maximum() const {
    const auto [p, q] = peak();
    (void)q;
    const double at = p < segments.size() ? segments[p].start : 1.0;
    return evaluate(at);
  }
};

void windowed_max(Concave& v, double gap) {
  const auto [p, q] = v.peak();
  const double zl = p < v.segments.size() ? v.segments[p].start : 1.0;
  const double vmax = v.evaluate(zl);

  if (gap >= 2.0) {
    v.segments = {{-1.0, 0.0}};
    v.value_at_left = vmax;
    return;
  }

  std::vector<Segment> next;
  next.reserve(v.segments.size() + 2);
  double left_value;
  if (zl - gap <= -1.0) {
    left_value = vmax;
  } else {
    left_value = v.evaluate(-1.0 + gap);
    for (std::size_t i = 0; i < p; ++i) {
      const double end = v.end_of(i) - gap;
      if (end <= -1.0) continue;
      next.push_back({std::max(v.segments[i].start - gap, -1.0), v.segments[i].slope});
    }
  }
  const double plateau = std::max(zl - gap, -1.0);
  if (plateau < 1.0) next.push_back({plateau, 0.0});
  for (std::size_t i = q; i < v.segments.size(); ++i) {
    const double start = v.segments[i].start + gap;
    if (start >= 1.0) break;
    next.push_back({start, v.segments[i].slope});
  }
  if (next.empty()) next.push_back({-1.0, 0.0});
  next.front().start = -1.0;

  // Drop zero-length pieces and fuse equal slopes.
  std::vector<Segment> tidy;
  tidy.reserve(next.size());
  for (std::size_t i = 0; i < next.size(); ++i) {
    const double end = i + 1 < next.size() ? next[i + 1].start : 1.0;
    if (end <= next[i].start && !tidy.empty()) continue;
    if (!tidy.empty() && tidy.back().slope == next[i].slope) continue;
    tidy.push_back(next[i]);
  }
  v.segments = std::move(tidy);
  v.value_at_left = left_value;
}

void add_linear(Concave& v, double c) {
  for (auto& s : v.segments) s.slope += c;
  v.value_at_left -= c;
}

}  // namespace

double bl_chain_1d(std::span<const double> sorted_points, std::span<const double> charge) {
  if (charge.empty()) return 0.0;
  Concave v;
  v.segments = {{-1.0, charge[0]}};
  v.value_at_left = -charge[0];
  for (std::size_t k = 1; k < charge.size(); ++k) {
    windowed_max(v, sorted_points[k] - sorted_points[k - 1]);
    add_linear(v, charge[k]);
  }
  return std::clamp(v.maximum(), 0.0, 2.0);
}

}  // namespace mfswitch::detail
