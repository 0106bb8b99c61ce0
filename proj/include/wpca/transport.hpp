#pragma once

#include "wpca/measures.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace wpca {

/// Nonnegative coupling between a row marginal (size p) and a column
/// marginal (size n), with solver diagnostics attached.
struct TransportPlan {
  Eigen::MatrixXd matrix;        // p x n
  Eigen::VectorXd row_marginal;  // prescribed row sums
  Eigen::VectorXd col_marginal;  // prescribed column sums
  double transport_cost = 0.0;   // <P, M>

  int iterations = 0;
  double marginal_residual = 0.0;  // L1 violation of the prescribed marginals
  bool converged = true;
  bool log_domain = false;
  std::vector<double> residual_history;
};

enum class SinkhornDomain { automatic, plain, log };

struct SinkhornOptions {
  double epsilon = 0.0;  // absolute regularization strength
  int max_iter = 10000;
  double tol = 1e-6;  // marginal L1 residual
  SinkhornDomain domain = SinkhornDomain::automatic;
  /// Log-domain solves start from a large epsilon and halve it down to the
  /// target, warm-starting each stage. Ignored when a warm start is given.
  bool epsilon_scaling = true;
  /// Over-relaxation factor in (0, 2) for plain-domain sweeps; 1 is the
  /// classical iteration.
  double relaxation = 1.0;
  bool record_residuals = false;
};

/// Dual potentials f (rows), g (cols) in cost units, P = exp((f+g-M)/eps).
/// Passing a populated state warm-starts the solver; it is overwritten with
/// the final potentials.
struct SinkhornState {
  Eigen::VectorXd f;
  Eigen::VectorXd g;
};

/// Entropy-regularized transport by matrix scaling.
///
/// The automatic domain switches to log-domain iterations when epsilon is
/// below 1e-2 * median(M), and falls back to them when the plain iteration
/// underflows. An explicit plain-domain request that underflows throws
/// NumericalError. Hitting max_iter is not an error: the plan is returned
/// with converged == false.
TransportPlan sinkhorn(const Eigen::VectorXd& row_weights,
                       const Eigen::VectorXd& col_weights, const CostMatrix& M,
                       const SinkhornOptions& opts,
                       SinkhornState* state = nullptr);

struct ExactOptions {
  std::size_t max_entries = 1'000'000;
};

/// Optimal vertex of the transportation polytope (network simplex).
TransportPlan exact_transport(const Eigen::VectorXd& row_weights,
                              const Eigen::VectorXd& col_weights,
                              const CostMatrix& M, const ExactOptions& opts = {});

struct TransportMethod {
  enum class Kind { exact, sinkhorn };
  Kind kind = Kind::exact;
  SinkhornOptions sinkhorn{};

  static TransportMethod exact() { return {}; }
  static TransportMethod entropic(double epsilon) {
    TransportMethod m;
    m.kind = Kind::sinkhorn;
    m.sinkhorn.epsilon = epsilon;
    return m;
  }
};

TransportPlan solve_transport(const Eigen::VectorXd& row_weights,
                              const Eigen::VectorXd& col_weights,
                              const CostMatrix& M, const TransportMethod& method,
                              SinkhornState* state = nullptr);

double w2_squared(const DiscreteMeasure& nu, const DiscreteMeasure& eta,
                  const TransportMethod& method = TransportMethod::exact());

/// Conditional-expectation map T(y_k) = sum_j P_kj x_j / b_k.
struct BarycentricMap {
  Eigen::MatrixXd images;          // d x p
  Eigen::VectorXd source_weights;  // b
  std::vector<bool> identity_fallback;
};

BarycentricMap barycentric_projection(const TransportPlan& plan,
                                      const Eigen::MatrixXd& sources,
                                      const Eigen::MatrixXd& targets);

/// Writes the nonzero entries as `row,col,mass` lines.
void write_plan_csv(const TransportPlan& plan, const std::string& path);

}  // namespace wpca
