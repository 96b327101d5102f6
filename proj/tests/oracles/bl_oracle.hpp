#pragma once

// Brute-force references for the bounded-Lipschitz distance on tiny supports.
//
// Transport form: sup over |f| <= 1, Lip(f) <= 1 of sum c_k f(x_k), with
// c = mu - eta, equals the cheapest way to move c+ onto c- when a unit of
// mass costs min(|x - y|, 2) (going through "destroy and recreate" costs 2).
// The minimum sits on a basic solution of the transportation polytope, i.e.
// a spanning tree of the bipartite supply/demand graph, so we just try every
// (p + q - 1)-edge subset.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

struct Atoms {
  std::size_t dim = 1;
  std::vector<double> x;  // row-major
  std::vector<double> w;
};

inline double dist(const Atoms& a, std::size_t i, const Atoms& b, std::size_t j) {
  double s = 0.0;
  for (std::size_t c = 0; c < a.dim; ++c) {
    const double d = a.x[i * a.dim + c] - b.x[j * b.dim + c];
    s += d * d;
  }
  return std::sqrt(s);
}

// Signed mass on the union of supports; coincident points merge.
inline Atoms signed_union(const Atoms& mu, const Atoms& eta) {
  Atoms u;
  u.dim = mu.dim;
  auto add = [&](const Atoms& m, std::size_t k, double sign) {
    for (std::size_t j = 0; j < u.w.size(); ++j) {
      if (dist(u, j, m, k) == 0.0) {
        u.w[j] += sign * m.w[k];
        return;
      }
    }
    for (std::size_t c = 0; c < m.dim; ++c) u.x.push_back(m.x[k * m.dim + c]);
    u.w.push_back(sign * m.w[k]);
  };
  for (std::size_t k = 0; k < mu.w.size(); ++k) add(mu, k, 1.0);
  for (std::size_t k = 0; k < eta.w.size(); ++k) add(eta, k, -1.0);
  return u;
}

inline double bl_transport_enumeration(const Atoms& mu, const Atoms& eta) {
  const Atoms u = signed_union(mu, eta);
  std::vector<std::size_t> sup, dem;
  for (std::size_t k = 0; k < u.w.size(); ++k) {
    if (u.w[k] > 1e-15) sup.push_back(k);
    if (u.w[k] < -1e-15) dem.push_back(k);
  }
  if (sup.empty() || dem.empty()) return 0.0;
  const std::size_t p = sup.size(), q = dem.size(), edges = p * q, need = p + q - 1;

  double best = std::numeric_limits<double>::infinity();
  std::vector<int> pick(edges, 0);
  std::fill(pick.begin(), pick.begin() + static_cast<long>(need), 1);
  std::sort(pick.begin(), pick.end());
  do {
    std::vector<std::size_t> chosen;
    for (std::size_t e = 0; e < edges; ++e) {
      if (pick[e]) chosen.push_back(e);
    }
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p + q), static_cast<Eigen::Index>(need));
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(p + q));
    for (std::size_t i = 0; i < p; ++i) rhs(static_cast<Eigen::Index>(i)) = u.w[sup[i]];
    for (std::size_t j = 0; j < q; ++j) rhs(static_cast<Eigen::Index>(p + j)) = -u.w[dem[j]];
    for (std::size_t c = 0; c < need; ++c) {
      const std::size_t i = chosen[c] / q, j = chosen[c] % q;
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = 1.0;
      a(static_cast<Eigen::Index>(p + j), static_cast<Eigen::Index>(c)) = 1.0;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (static_cast<std::size_t>(lu.rank()) != need) continue;  // not a tree
    const Eigen::VectorXd flow = lu.solve(rhs);
    if ((a * flow - rhs).cwiseAbs().maxCoeff() > 1e-10) continue;
    if (flow.minCoeff() < -1e-12) continue;
    double cost = 0.0;
    for (std::size_t c = 0; c < need; ++c) {
      const std::size_t i = chosen[c] / q, j = chosen[c] % q;
      cost += flow(static_cast<Eigen::Index>(c)) * std::min(dist(u, sup[i], u, dem[j]), 2.0);
    }
    best = std::min(best, cost);
  } while (std::next_permutation(pick.begin(), pick.end()));
  return best;
}

// Lower bound: best admissible f with values on a grid of step h in [-1, 1].
inline double bl_grid_lower_bound(const Atoms& mu, const Atoms& eta, double h) {
  const Atoms u = signed_union(mu, eta);
  const std::size_t n = u.w.size();
  const int levels = static_cast<int>(std::lround(2.0 / h)) + 1;
  std::vector<int> idx(n, 0);
  std::vector<double> f(n);
  double best = 0.0;
  for (;;) {
    for (std::size_t k = 0; k < n; ++k) f[k] = -1.0 + h * idx[k];
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (std::abs(f[i] - f[j]) > dist(u, i, u, j) + 1e-12) {
          ok = false;
          break;
        }
      }
    }
    if (ok) {
      double v = 0.0;
      for (std::size_t k = 0; k < n; ++k) v += u.w[k] * f[k];
      best = std::max(best, std::abs(v));
    }
    std::size_t k = 0;
    while (k < n && ++idx[k] == levels) idx[k++] = 0;
    if (k == n) break;
  }
  return best;
}

}  // namespace oracle
