#include "lp_simplex.hpp"

#include "wpca/error.hpp"

#include <cmath>
#include <limits>

namespace wpca::detail {

namespace {

using Eigen::Index;

class RevisedSimplex {
 public:
  explicit RevisedSimplex(const IncidenceLp& lp)
      : lp_(lp), m_(lp.rows), nstruct_(static_cast<Index>(lp.columns.size())) {
    basis_.resize(static_cast<std::size_t>(m_));
    in_basis_.assign(static_cast<std::size_t>(nstruct_ + m_), -1);
    for (Index r = 0; r < m_; ++r) {
      basis_[static_cast<std::size_t>(r)] = nstruct_ + r;  // artificial for row r
      in_basis_[static_cast<std::size_t>(nstruct_ + r)] = r;
    }
    binv_ = Eigen::MatrixXd::Identity(m_, m_);
    xb_ = lp.rhs;
  }

  LpSolution solve() {
    // Phase 1: minimize the sum of artificials.
    phase_cost_.assign(static_cast<std::size_t>(nstruct_ + m_), 0.0);
    for (Index r = 0; r < m_; ++r) phase_cost_[static_cast<std::size_t>(nstruct_ + r)] = 1.0;
    iterate();
    double infeasibility = 0.0;
    for (Index r = 0; r < m_; ++r) {
      if (basis_[static_cast<std::size_t>(r)] >= nstruct_) infeasibility += xb_[r];
    }
    if (infeasibility > 1e-9) {
      throw NumericalError("multi-marginal LP is infeasible");
    }
    drive_out_artificials();

    // Phase 2.
    for (Index j = 0; j < nstruct_; ++j) {
      phase_cost_[static_cast<std::size_t>(j)] = lp_.cost[static_cast<std::size_t>(j)];
    }
    for (Index r = 0; r < m_; ++r) phase_cost_[static_cast<std::size_t>(nstruct_ + r)] = 0.0;
    iterate();

    LpSolution sol;
    sol.x = Eigen::VectorXd::Zero(nstruct_);
    for (Index r = 0; r < m_; ++r) {
      const Index j = basis_[static_cast<std::size_t>(r)];
      if (j < nstruct_) sol.x[j] = std::max(0.0, xb_[r]);
    }
    for (Index j = 0; j < nstruct_; ++j) sol.objective += lp_.cost[static_cast<std::size_t>(j)] * sol.x[j];
    sol.pivots = pivots_;
    return sol;
  }

 private:
  double column_dot(Index j, const Eigen::VectorXd& y) const {
    if (j >= nstruct_) return y[j - nstruct_];
    double s = 0.0;
    for (Index r : lp_.columns[static_cast<std::size_t>(j)]) s += y[r];
    return s;
  }

  Eigen::VectorXd direction(Index j) const {
    if (j >= nstruct_) return binv_.col(j - nstruct_);
    Eigen::VectorXd d = Eigen::VectorXd::Zero(m_);
    for (Index r : lp_.columns[static_cast<std::size_t>(j)]) d += binv_.col(r);
    return d;
  }

  void iterate() {
    const double price_tol = 1e-11 * (1.0 + max_cost());
    int degenerate_run = 0;
    const long limit = 200 * (nstruct_ + m_) + 10000;
    for (long guard = 0;; ++guard) {
      if (guard > limit) throw NumericalError("simplex iteration limit reached");
      if (pivots_ % 64 == 63) refactor();

      Eigen::VectorXd cb(m_);
      for (Index r = 0; r < m_; ++r) cb[r] = phase_cost_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(r)])];
      const Eigen::VectorXd y = binv_.transpose() * cb;

      const bool bland = degenerate_run > 50;
      Index entering = -1;
      double best = -price_tol;
      for (Index j = 0; j < nstruct_; ++j) {
        if (in_basis_[static_cast<std::size_t>(j)] >= 0) continue;
        const double rc = phase_cost_[static_cast<std::size_t>(j)] - column_dot(j, y);
        if (rc < best) {
          best = rc;
          entering = j;
          if (bland) break;
        }
      }
      if (entering < 0) return;

      const Eigen::VectorXd d = direction(entering);
      Index leave = -1;
      double ratio = std::numeric_limits<double>::infinity();
      for (Index r = 0; r < m_; ++r) {
        if (d[r] > 1e-12) {
          const double q = std::max(0.0, xb_[r]) / d[r];
          if (q < ratio - 1e-14 ||
              (q <= ratio + 1e-14 && leave >= 0 &&
               basis_[static_cast<std::size_t>(r)] < basis_[static_cast<std::size_t>(leave)])) {
            ratio = std::min(ratio, q);
            leave = r;
          }
        }
      }
      if (leave < 0) throw NumericalError("multi-marginal LP is unbounded");
      degenerate_run = ratio <= 1e-14 ? degenerate_run + 1 : 0;
      pivot(entering, leave, d, ratio);
    }
  }

  void pivot(Index entering, Index leave, const Eigen::VectorXd& d, double step) {
    xb_ -= step * d;
    xb_[leave] = step;
    const double piv = d[leave];
    binv_.row(leave) /= piv;
    for (Index r = 0; r < m_; ++r) {
      if (r != leave && d[r] != 0.0) binv_.row(r) -= d[r] * binv_.row(leave);
    }
    in_basis_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(leave)])] = -1;
    basis_[static_cast<std::size_t>(leave)] = entering;
    in_basis_[static_cast<std::size_t>(entering)] = leave;
    ++pivots_;
  }

  // Replace basic artificials (at zero level) by structural columns where
  // possible; the rest sit on redundant rows and stay at zero.
  void drive_out_artificials() {
    for (Index r = 0; r < m_; ++r) {
      if (basis_[static_cast<std::size_t>(r)] < nstruct_) continue;
      for (Index j = 0; j < nstruct_; ++j) {
        if (in_basis_[static_cast<std::size_t>(j)] >= 0) continue;
        const Eigen::VectorXd d = direction(j);
        if (std::abs(d[r]) > 1e-9) {
          pivot(j, r, d, std::max(0.0, xb_[r]) / d[r]);
          break;
        }
      }
    }
    refactor();
  }

  void refactor() {
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m_, m_);
    for (Index r = 0; r < m_; ++r) {
      const Index j = basis_[static_cast<std::size_t>(r)];
      if (j >= nstruct_) {
        B(j - nstruct_, r) = 1.0;
      } else {
        for (Index row : lp_.columns[static_cast<std::size_t>(j)]) B(row, r) = 1.0;
      }
    }
    binv_ = B.partialPivLu().inverse();
    xb_ = binv_ * lp_.rhs;
  }

  double max_cost() const {
    double mx = 0.0;
    for (double c : lp_.cost) mx = std::max(mx, std::abs(c));
    return mx;
  }

  const IncidenceLp& lp_;
  Index m_;
  Index nstruct_;
  std::vector<Index> basis_;
  std::vector<Index> in_basis_;
  std::vector<double> phase_cost_;
  Eigen::MatrixXd binv_;
  Eigen::VectorXd xb_;
  long pivots_ = 0;
};

}  // namespace

LpSolution solve_incidence_lp(const IncidenceLp& lp) {
  if (lp.rhs.size() != lp.rows || lp.cost.size() != lp.columns.size()) {
    throw InvalidArgument("malformed LP");
  }
  RevisedSimplex solver(lp);
  return solver.solve();
}

}  // namespace wpca::detail
