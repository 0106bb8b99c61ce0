#pragma once

#include "wpca/measures.hpp"
#include "wpca/transport.hpp"

#include <cstdint>
#include <vector>

namespace wpca {

struct FixedSupportOptions {
  double epsilon = 0.0;  // absolute
  int max_iter = 5000;
  double tol = 1e-7;             // L1 change of the barycenter weights
  std::vector<double> lambdas;   // empty: uniform 1/N
};

struct FixedSupportResult {
  DiscreteMeasure barycenter;
  int iterations = 0;
  bool converged = false;
  /// Negated dual objective of the entropic problem after each iteration;
  /// non-increasing.
  std::vector<double> objective_trace;
};

/// Entropic barycenter of histograms sharing the support `grid`, computed
/// by iterative Bregman projections in the log domain.
FixedSupportResult barycenter_fixed_support(const std::vector<Eigen::VectorXd>& histograms,
                                            const Eigen::MatrixXd& grid,
                                            const FixedSupportOptions& opts);

struct FreeSupportOptions {
  Index support_size = 1;
  /// Plans between the barycenter and each input; exact or entropic.
  TransportMethod method = TransportMethod::exact();
  int max_iter = 100;
  double tol = 1e-9;  // largest atom displacement between iterations
  std::uint64_t seed = 0;
  /// Independent k-means initializations (seeds seed, seed + 1, ...); the
  /// run with the lowest final objective is returned.
  int restarts = 1;
  /// Also start from each input with at least `support_size` atoms,
  /// quantized by k-means. Costs one extra run per such input.
  bool input_starts = true;
  std::vector<double> lambdas;
};

struct FreeSupportResult {
  DiscreteMeasure barycenter;
  int iterations = 0;
  /// sum_i lambda_i <P_i, M_i> before each location update.
  std::vector<double> objective_trace;
};

/// Barycenter with `support_size` uniformly weighted atoms whose locations
/// alternate between transport plans and barycentric updates. Atoms start
/// at k-means centroids of the pooled inputs and, optionally, of each input;
/// the best final objective wins. `objective_trace` and `iterations` describe the returned start.
FreeSupportResult barycenter_free_support(const std::vector<DiscreteMeasure>& measures,
                                          const FreeSupportOptions& opts);

struct MultiMarginalOptions {
  std::size_t max_tuples = 100'000;
  std::vector<double> lambdas;
  double merge_tol = 1e-12;
};

/// Exact barycenter through the multi-marginal linear program: atoms sit
/// at weighted averages of support tuples that carry optimal mass.
DiscreteMeasure barycenter_multimarginal_exact(const std::vector<DiscreteMeasure>& measures,
                                               const MultiMarginalOptions& opts = {});

/// sum_i lambda_i W2^2(mu_i, bar) with exact transport.
double barycenter_objective(const std::vector<DiscreteMeasure>& measures,
                            const DiscreteMeasure& bar,
                            const std::vector<double>& lambdas = {});

}  // namespace wpca
