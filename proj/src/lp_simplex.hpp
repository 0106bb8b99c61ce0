#pragma once

#include <Eigen/Dense>

#include <vector>

namespace wpca::detail {

// Equality-constrained LP  min c^T x  s.t.  A x = rhs, x >= 0, where every
// column of A has unit entries on a short list of rows (the structure of
// multi-marginal transport constraints).
struct IncidenceLp {
  Eigen::Index rows = 0;
  std::vector<std::vector<Eigen::Index>> columns;  // row indices per column
  std::vector<double> cost;
  Eigen::VectorXd rhs;  // must be >= 0
};

struct LpSolution {
  Eigen::VectorXd x;
  double objective = 0.0;
  long pivots = 0;
};

// Two-phase revised simplex with a dense basis inverse. Dantzig pricing,
// switching to Bland's rule after a run of degenerate pivots.
LpSolution solve_incidence_lp(const IncidenceLp& lp);

}  // namespace wpca::detail
