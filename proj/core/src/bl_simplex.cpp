// The BL linear program
//   max c'f  s.t.  -1 <= f_k <= 1,  f_k - f_l <= D_kl
// is solved through its dual, a min-cost flow: every support point is a node
// with supply c_k; a virtual hub absorbs or emits any amount at unit cost
// (columns +e_k and -e_k), and arc k->l ships at cost D_kl (column e_k - e_l).
// The hub row is redundant and dropped, so the basis matrix is an incidence
// matrix of a spanning forest and B^{-1} has entries in {-1, 0, 1}. The row
// duals of the optimal basis are the optimal test-function values f.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include <Eigen/Dense>

#include "bl_solvers.hpp"
#include "mfswitch/error.hpp"

namespace mfswitch::detail {
namespace {

constexpr double kPriceTolerance = 1e-12;
constexpr double kCutTolerance = 1e-12;

struct Arc {
  std::size_t from;
  std::size_t to;
  double cost;
};

class FlowSimplex {
 public:
  FlowSimplex(const SignedSupport& s, std::size_t max_iterations)
      : s_(s), n_(s.size()), max_iterations_(max_iterations), binv_(n_, n_), basis_(n_), x_(n_), y_(n_) {
    binv_.setZero();
    for (std::size_t k = 0; k < n_; ++k) {
      const bool up = s.charge[k] >= 0.0;
      basis_[k] = up ? k : n_ + k;
      binv_(index(k), index(k)) = up ? 1.0 : -1.0;
      x_[k] = std::abs(s.charge[k]);
      y_[k] = up ? 1.0 : -1.0;
    }
  }

  double distance(std::size_t k, std::size_t l) const {
    double acc = 0.0;
    for (std::size_t c = 0; c < s_.dim; ++c) {
      const double d = s_.points[k * s_.dim + c] - s_.points[l * s_.dim + c];
      acc += d * d;
    }
    return std::sqrt(acc);
  }

  bool add_arc(std::size_t from, std::size_t to) {
    if (!present_.insert(from * n_ + to).second) return false;
    arcs_.push_back({from, to, distance(from, to)});
    return true;
  }

  void seed_neighbours(std::size_t k_nearest) {
    std::vector<std::pair<double, std::size_t>> row;
    for (std::size_t k = 0; k < n_; ++k) {
      row.clear();
      for (std::size_t l = 0; l < n_; ++l) {
        if (l == k) continue;
        const double d = distance(k, l);
        if (d < 2.0) row.emplace_back(d, l);
      }
      const std::size_t take = std::min(k_nearest, row.size());
      std::partial_sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(take), row.end());
      for (std::size_t t = 0; t < take; ++t) {
        add_arc(k, row[t].second);
        add_arc(row[t].second, k);
      }
    }
  }

  SimplexOutcome solve() {
    for (;;) {
      pivot_until_optimal();
      refresh();
      if (!separate()) break;
    }
    SimplexOutcome out;
    out.potentials = y_;
    for (std::size_t k = 0; k < n_; ++k) out.value += s_.charge[k] * y_[k];
    for (std::size_t i = 0; i < n_; ++i) out.primal_objective += cost(basis_[i]) * x_[i];
    out.iterations = iterations_;
    out.active_arcs = arcs_.size();
    return out;
  }

 private:
  static Eigen::Index index(std::size_t i) { return static_cast<Eigen::Index>(i); }

  std::size_t columns() const { return 2 * n_ + arcs_.size(); }

  double cost(std::size_t j) const { return j < 2 * n_ ? 1.0 : arcs_[j - 2 * n_].cost; }

  double reduced_cost(std::size_t j) const {
    if (j < n_) return 1.0 - y_[j];
    if (j < 2 * n_) return 1.0 + y_[j - n_];
    const Arc& a = arcs_[j - 2 * n_];
    return a.cost - y_[a.from] + y_[a.to];
  }

  void column_image(std::size_t j, std::vector<double>& u) const {
    if (j < n_) {
      for (std::size_t i = 0; i < n_; ++i) u[i] = binv_(index(i), index(j));
    } else if (j < 2 * n_) {
      for (std::size_t i = 0; i < n_; ++i) u[i] = -binv_(index(i), index(j - n_));
    } else {
      const Arc& a = arcs_[j - 2 * n_];
      for (std::size_t i = 0; i < n_; ++i) u[i] = binv_(index(i), index(a.from)) - binv_(index(i), index(a.to));
    }
  }

  void pivot_until_optimal() {
    std::vector<double> u(n_);
    for (;;) {
      std::size_t entering = columns();
      double rc = 0.0;
      for (std::size_t j = 0; j < columns(); ++j) {
        const double r = reduced_cost(j);
        if (r < -kPriceTolerance) {
          entering = j;
          rc = r;
          break;
        }
      }
      if (entering == columns()) return;
      if (++iterations_ > max_iterations_) {
        throw Error(ErrorKind::SolverStall,
                    "simplex exceeded " + std::to_string(max_iterations_) + " pivots");
      }
      column_image(entering, u);

      std::size_t leave = n_;
      double theta = 0.0;
      for (std::size_t i = 0; i < n_; ++i) {
        if (u[i] < 0.5) continue;
        const double ratio = std::max(x_[i], 0.0) / u[i];
        if (leave == n_ || ratio < theta - 1e-15 ||
            (ratio <= theta + 1e-15 && basis_[i] < basis_[leave])) {
          leave = i;
          theta = ratio;
        }
      }
      if (leave == n_) throw Error(ErrorKind::SolverStall, "flow problem reported unbounded");

      const double ur = u[leave];
      const Eigen::RowVectorXd pivot_row = binv_.row(index(leave)) / ur;
      for (std::size_t k = 0; k < n_; ++k) y_[k] += rc * pivot_row(index(k));
      for (std::size_t i = 0; i < n_; ++i) {
        if (i == leave) continue;
        if (u[i] != 0.0) {
          x_[i] -= theta * u[i];
          binv_.row(index(i)) -= u[i] * pivot_row;
        }
      }
      x_[leave] = theta;
      binv_.row(index(leave)) = pivot_row;
      basis_[leave] = entering;
    }
  }

  // Recompute primal values and potentials from B^{-1} to shed drift.
  void refresh() {
    std::fill(y_.begin(), y_.end(), 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      const double cb = cost(basis_[i]);
      double xi = 0.0;
      for (std::size_t k = 0; k < n_; ++k) {
        const double b = binv_(index(i), index(k));
        if (b == 0.0) continue;
        y_[k] += cb * b;
        xi += b * s_.charge[k];
      }
      x_[i] = xi;
    }
  }

  // Adds every violated pair constraint f_k - f_l <= D_kl; false if none.
  bool separate() {
    bool added = false;
    for (std::size_t k = 0; k < n_; ++k) {
      for (std::size_t l = 0; l < n_; ++l) {
        if (k == l || y_[k] - y_[l] <= kCutTolerance) continue;
        if (y_[k] - y_[l] > distance(k, l) + kCutTolerance) added = add_arc(k, l) || added;
      }
    }
    return added;
  }

  const SignedSupport& s_;
  std::size_t n_;
  std::size_t max_iterations_;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> binv_;
  std::vector<std::size_t> basis_;
  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<Arc> arcs_;
  std::unordered_set<std::size_t> present_;
  std::size_t iterations_ = 0;
};

}  // namespace

SimplexOutcome bl_simplex(const SignedSupport& support, std::size_t initial_neighbors,
                          std::size_t max_iterations) {
  if (support.size() == 0) return {};
  FlowSimplex lp(support, max_iterations);
  lp.seed_neighbours(initial_neighbors);
  return lp.solve();
}

}  // namespace mfswitch::detail
