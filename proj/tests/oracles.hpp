#pragma once

// Test-only reference computations. Nothing here calls into the library's
// solvers, so they can be used to check them.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

using Eigen::Index;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo = 0.0, double hi = 1.0) {
    return lo + (hi - lo) * static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }
  double normal() {
    const double u1 = uniform(1e-300, 1.0);
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }
  Index integer(Index lo, Index hi) {  // inclusive
    return lo + static_cast<Index>(gen_() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  Eigen::MatrixXd normal_matrix(Index r, Index c) {
    Eigen::MatrixXd m(r, c);
    for (Index j = 0; j < c; ++j)
      for (Index i = 0; i < r; ++i) m(i, j) = normal();
    return m;
  }
  Eigen::VectorXd simplex(Index n, double floor = 0.05) {
    Eigen::VectorXd w(n);
    for (Index i = 0; i < n; ++i) w[i] = floor + uniform();
    return w / w.sum();
  }

 private:
  std::mt19937_64 gen_;
};

inline Eigen::MatrixXd loop_cost(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& X) {
  Eigen::MatrixXd M(Z.cols(), X.cols());
  for (Index k = 0; k < Z.cols(); ++k) {
    for (Index j = 0; j < X.cols(); ++j) {
      double s = 0.0;
      for (Index r = 0; r < Z.rows(); ++r) {
        const double d = Z(r, k) - X(r, j);
        s += d * d;
      }
      M(k, j) = s;
    }
  }
  return M;
}

// Min-cost transport by negative cycle cancelling on the residual graph,
// started from the north-west corner plan.
inline Eigen::MatrixXd cycle_cancel_transport(const Eigen::VectorXd& r,
                                              const Eigen::VectorXd& c,
                                              const Eigen::MatrixXd& M) {
  const Index p = r.size();
  const Index n = c.size();
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(p, n);
  {
    Eigen::VectorXd rr = r;
    Eigen::VectorXd cc = c;
    Index i = 0;
    Index j = 0;
    while (i < p && j < n) {
      const double m = std::min(rr[i], cc[j]);
      P(i, j) += m;
      rr[i] -= m;
      cc[j] -= m;
      if (i == p - 1) {
        ++j;
      } else if (j == n - 1) {
        ++i;
      } else if (rr[i] <= cc[j]) {
        ++i;
      } else {
        ++j;
      }
    }
  }
  const Index V = p + n;
  for (int round = 0; round < 100000; ++round) {
    // Residual edges: row->col always (cost M), col->row when P > 0 (cost -M).
    struct Edge { Index from, to; double cost; Index k, j; };
    std::vector<Edge> edges;
    for (Index k = 0; k < p; ++k) {
      for (Index j = 0; j < n; ++j) {
        edges.push_back({k, p + j, M(k, j), k, j});
        if (P(k, j) > 1e-15) edges.push_back({p + j, k, -M(k, j), k, j});
      }
    }
    std::vector<double> dist(static_cast<std::size_t>(V), 0.0);
    std::vector<Index> pred(static_cast<std::size_t>(V), -1);
    Index updated = -1;
    for (Index it = 0; it < V; ++it) {
      updated = -1;
      for (Index e = 0; e < static_cast<Index>(edges.size()); ++e) {
        const auto& ed = edges[static_cast<std::size_t>(e)];
        const double nd = dist[static_cast<std::size_t>(ed.from)] + ed.cost;
        if (nd < dist[static_cast<std::size_t>(ed.to)] - 1e-12) {
          dist[static_cast<std::size_t>(ed.to)] = nd;
          pred[static_cast<std::size_t>(ed.to)] = e;
          updated = ed.to;
        }
      }
      if (updated < 0) break;
    }
    if (updated < 0) return P;
    Index v = updated;
    for (Index it = 0; it < V; ++it) {
      v = edges[static_cast<std::size_t>(pred[static_cast<std::size_t>(v)])].from;
    }
    std::vector<Index> cycle;
    Index u = v;
    do {
      const Index e = pred[static_cast<std::size_t>(u)];
      cycle.push_back(e);
      u = edges[static_cast<std::size_t>(e)].from;
    } while (u != v);
    double push = std::numeric_limits<double>::infinity();
    double cost = 0.0;
    for (Index e : cycle) {
      const auto& ed = edges[static_cast<std::size_t>(e)];
      cost += ed.cost;
      if (ed.from >= p) push = std::min(push, P(ed.k, ed.j));
    }
    if (cost > -1e-12) return P;
    for (Index e : cycle) {
      const auto& ed = edges[static_cast<std::size_t>(e)];
      P(ed.k, ed.j) += ed.from < p ? push : -push;
    }
  }
  return P;
}

// Squared W2 between 1-D measures by integrating the quantile functions.
inline double w2_1d(std::vector<std::pair<double, double>> a,
                    std::vector<std::pair<double, double>> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0;
  std::size_t j = 0;
  double ra = a[0].second;
  double rb = b[0].second;
  double total = 0.0;
  while (i < a.size() && j < b.size()) {
    const double m = std::min(ra, rb);
    const double d = a[i].first - b[j].first;
    total += m * d * d;
    ra -= m;
    rb -= m;
    if (ra <= 1e-15) {
      if (++i < a.size()) ra = a[i].second;
    }
    if (rb <= 1e-15) {
      if (++j < b.size()) rb = b[j].second;
    }
  }
  return total;
}

// Central differences of a scalar function of a matrix.
inline Eigen::MatrixXd finite_difference(
    const std::function<double(const Eigen::MatrixXd&)>& f,
    const Eigen::MatrixXd& at, double h = 1e-5) {
  Eigen::MatrixXd g(at.rows(), at.cols());
  for (Index j = 0; j < at.cols(); ++j) {
    for (Index i = 0; i < at.rows(); ++i) {
      Eigen::MatrixXd up = at;
      Eigen::MatrixXd dn = at;
      up(i, j) += h;
      dn(i, j) -= h;
      g(i, j) = (f(up) - f(dn)) / (2.0 * h);
    }
  }
  return g;
}

inline double relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = std::max({a.norm(), b.norm(), 1e-12});
  return (a - b).norm() / scale;
}

// Closed-form eigen-decomposition of a symmetric 2x2 matrix; returns the
// eigenvector of the largest eigenvalue.
inline Eigen::Vector2d top_eigenvector_2x2(const Eigen::Matrix2d& S) {
  const double a = S(0, 0);
  const double b = S(0, 1);
  const double d = S(1, 1);
  const double tr = a + d;
  const double disc = std::sqrt(std::max(0.0, (a - d) * (a - d) / 4.0 + b * b));
  const double lambda = tr / 2.0 + disc;
  Eigen::Vector2d v;
  if (std::abs(b) > 1e-14) {
    v << lambda - d, b;
  } else {
    v = a >= d ? Eigen::Vector2d(1, 0) : Eigen::Vector2d(0, 1);
  }
  return v.normalized();
}

}  // namespace oracle
