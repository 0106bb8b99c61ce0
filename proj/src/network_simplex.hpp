#pragma once

#include <Eigen/Dense>

namespace wpca::detail {

struct NetworkSimplexResult {
  Eigen::MatrixXd flow;  // p x n
  long pivots = 0;
};

// Uncapacitated bipartite min-cost flow from `supply` (rows) to `demand`
// (cols) with a dense cost matrix. Primal network simplex over strongly
// feasible spanning trees, block-search pricing.
NetworkSimplexResult network_simplex(const Eigen::VectorXd& supply,
                                     const Eigen::VectorXd& demand,
                                     const Eigen::MatrixXd& cost);

}  // namespace wpca::detail
