#pragma once

#include "wpca/geodesics.hpp"
#include "wpca/measures.hpp"
#include "wpca/transport.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace wpca {

enum class ProjectionSolver { automatic, exact, sinkhorn };

/// Which velocity fields the solver may visit. `translation` restricts both
/// fields to uniform translations (every optimal-map projection is then a
/// no-op and is skipped).
enum class FieldFamily { general, translation };

struct SolverConfig {
  double lambda = 1.0;          // weight of the proportionality penalty
  std::optional<double> beta;   // gradient step; default 1 / (2 N)
  int grid_k = 17;              // t grid size, endpoints included
  double epsilon = 0.0;         // absolute Sinkhorn regularization
  int n_components = 1;
  int max_outer_iter = 200;
  double obj_tol = 1e-5;        // relative change, two iterations in a row
  std::uint64_t seed = 0;

  /// Solver of the N x K plans in the t search.
  TransportMethod::Kind transport_solver = TransportMethod::Kind::exact;
  /// Solver of the two plans in the optimal-map projection. `automatic`
  /// picks exact plans up to exact_projection_limit base atoms.
  ProjectionSolver projection_solver = ProjectionSolver::automatic;
  Index exact_projection_limit = 512;
  double sinkhorn_tol = 1e-7;
  int sinkhorn_max_iter = 5000;
  /// Over-relaxation of the plain-domain Sinkhorn sweeps, in (0, 2).
  double sinkhorn_relaxation = 1.0;

  FieldFamily fields = FieldFamily::general;
  int max_halvings = 20;
  int projection_rounds = 5;
  double orthogonality_tol = 1e-8;

  /// Throws InvalidArgument on violated constraints.
  void validate() const;
};

struct GridSearchResult {
  double t = 0.0;
  TransportPlan plan;
  double value = 0.0;
  std::vector<double> grid_values;  // one per grid point
};

/// Minimizes the transport cost between mu and the curve over the uniform
/// grid {0, 1/(K-1), ..., 1}; ties go to the smallest t. `states`, when
/// given, holds one Sinkhorn warm start per grid point.
GridSearchResult distance_to_geodesic(const GeneralizedGeodesic& g, const DiscreteMeasure& mu,
                                      const SolverConfig& cfg,
                                      std::vector<SinkhornState>* states = nullptr);

/// b^T z + a^T x - 2 <P, Z^T X> with Z = Y - A + t (A + B).
double majorization_value(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                          const TransportPlan& plan, double t, const DiscreteMeasure& mu,
                          const DiscreteMeasure& base);

/// Gradients of majorization_value for the metric of L2(b):
/// 2 (t - 1) R and 2 t R with R = Z - X P^T diag(1/b).
/// Multiply by diag(b) to get derivatives with respect to matrix entries.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> mm_gradients(const Eigen::MatrixXd& A,
                                                         const Eigen::MatrixXd& B,
                                                         const TransportPlan& plan, double t,
                                                         const DiscreteMeasure& mu,
                                                         const DiscreteMeasure& base);

/// L2(b)-orthogonal projection of v onto the complement of span(priors).
/// Priors that are numerically dependent on earlier ones are dropped.
Eigen::MatrixXd orthogonality_projection(const Eigen::MatrixXd& v,
                                         const std::vector<Eigen::MatrixXd>& priors,
                                         const Eigen::VectorXd& b);

/// Largest |<v, w>_b| / (|v|_b |w|_b) over the priors (0 for zero fields).
double orthogonality_residual(const Eigen::MatrixXd& v,
                              const std::vector<Eigen::MatrixXd>& priors,
                              const Eigen::VectorXd& b);

/// Replaces id - V1 and id + V2 by the barycentric maps of optimal plans
/// from the base to their pushforwards.
GeneralizedGeodesic optimal_map_projection(const GeneralizedGeodesic& g,
                                           const TransportMethod& method);
/// Solver chosen from cfg (automatic: exact up to the size limit).
GeneralizedGeodesic optimal_map_projection(const GeneralizedGeodesic& g,
                                           const SolverConfig& cfg);

/// Diagnostics of one outer iteration.
struct StepRecord {
  double surrogate_start = 0.0;     // at the expansion point
  double surrogate_gradient = 0.0;  // after the gradient step
  double surrogate_projected = 0.0; // after orthogonality and map projections
  double objective = 0.0;           // true objective at the candidate
  double step = 0.0;
  int halvings = 0;
  bool accepted = false;
};

struct PrincipalComponent {
  VelocityField v1;
  VelocityField v2;
  std::vector<double> projection_times;  // per measure
  /// Objective sum_i min_t W2^2 + lambda Omega: initial value, then one
  /// entry per accepted outer iteration.
  std::vector<double> objective_trace;
  std::vector<StepRecord> steps;
  int iterations = 0;
  bool converged = false;
};

struct PrincipalComponentSet {
  DiscreteMeasure base;  // zero-weight atoms removed
  std::vector<PrincipalComponent> components;

  GeneralizedGeodesic geodesic(std::size_t c) const {
    return {base, components.at(c).v1, components.at(c).v2};
  }
};

struct FitHooks {
  /// Called after every optimal-map projection with (component, iteration,
  /// projected curve).
  std::function<void(int, int, const GeneralizedGeodesic&)> after_map_projection;
};

PrincipalComponentSet fit(const std::vector<DiscreteMeasure>& measures,
                          const DiscreteMeasure& base, const SolverConfig& cfg,
                          const FitHooks& hooks = {});

struct EuclideanPca {
  Eigen::MatrixXd directions;  // d x r, orthonormal columns
  Eigen::VectorXd variances;   // descending
};

/// Principal directions of the measures' mean points. Directions with
/// negligible variance are omitted.
EuclideanPca euclidean_pca_means(const std::vector<DiscreteMeasure>& measures);

}  // namespace wpca
