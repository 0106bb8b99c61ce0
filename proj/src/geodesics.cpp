#include "wpca/geodesics.hpp"

#include "wpca/error.hpp"
#include "wpca/transport.hpp"

#include <cmath>
#include <vector>

namespace wpca {

namespace {

void check_time(double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw InvalidArgument("t must lie in [0, 1]");
  }
}

}  // namespace

GeneralizedGeodesic::GeneralizedGeodesic(DiscreteMeasure base, VelocityField v1,
                                         VelocityField v2)
    : base_(std::move(base)), v1_(std::move(v1)), v2_(std::move(v2)) {
  if (v1_.size() != base_.size() || v2_.size() != base_.size()) {
    throw InvalidArgument("velocity fields must have one column per base atom");
  }
  if (v1_.dim() != base_.dim() || v2_.dim() != base_.dim()) {
    throw InvalidArgument("dimension mismatch");
  }
}

Eigen::MatrixXd GeneralizedGeodesic::locations_at(double t) const {
  return base_.locations() - v1_.vectors() + t * (v1_.vectors() + v2_.vectors());
}

DiscreteMeasure merge_atoms(const Eigen::MatrixXd& locations,
                            const Eigen::VectorXd& masses, double tol) {
  const double tol2 = tol * tol;
  std::vector<Index> reps;
  std::vector<double> mass;
  for (Index j = 0; j < locations.cols(); ++j) {
    bool merged = false;
    for (std::size_t r = 0; r < reps.size(); ++r) {
      if ((locations.col(reps[r]) - locations.col(j)).squaredNorm() <= tol2) {
        mass[r] += masses[j];
        merged = true;
        break;
      }
    }
    if (!merged) {
      reps.push_back(j);
      mass.push_back(masses[j]);
    }
  }
  Eigen::MatrixXd loc(locations.rows(), static_cast<Index>(reps.size()));
  Eigen::VectorXd w(static_cast<Index>(reps.size()));
  for (std::size_t r = 0; r < reps.size(); ++r) {
    loc.col(static_cast<Index>(r)) = locations.col(reps[r]);
    w[static_cast<Index>(r)] = mass[r];
  }
  return DiscreteMeasure::normalized(std::move(loc), std::move(w));
}

DiscreteMeasure mccann_interpolant(const DiscreteMeasure& nu,
                                   const DiscreteMeasure& eta, double t,
                                   double merge_tol) {
  check_time(t);
  if (nu.dim() != eta.dim()) {
    throw InvalidArgument("dimension mismatch");
  }
  const auto plan = exact_transport(nu.weights(), eta.weights(),
                                    cost_matrix(nu.locations(), eta.locations()));
  const Index count = (plan.matrix.array() > 0.0).count();
  Eigen::MatrixXd loc(nu.dim(), count);
  Eigen::VectorXd w(count);
  Index a = 0;
  for (Index j = 0; j < plan.matrix.cols(); ++j) {
    for (Index k = 0; k < plan.matrix.rows(); ++k) {
      const double m = plan.matrix(k, j);
      if (m > 0.0) {
        loc.col(a) = (1.0 - t) * nu.locations().col(k) + t * eta.locations().col(j);
        w[a] = m;
        ++a;
      }
    }
  }
  return merge_atoms(loc, w, merge_tol);
}

DiscreteMeasure sample_geodesic(const GeneralizedGeodesic& g, double t) {
  check_time(t);
  // Weights are the base weights, already validated.
  return DiscreteMeasure(g.locations_at(t), g.base().weights());
}

double omega(const Eigen::MatrixXd& v1, const Eigen::MatrixXd& v2,
             const Eigen::VectorXd& b) {
  const double s = weighted_inner(v1, v2, b) - weighted_norm(v1, b) * weighted_norm(v2, b);
  return s * s;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> grad_omega(const Eigen::MatrixXd& v1,
                                                       const Eigen::MatrixXd& v2,
                                                       const Eigen::VectorXd& b) {
  const double n1 = weighted_norm(v1, b);
  const double n2 = weighted_norm(v2, b);
  Eigen::MatrixXd g1 = Eigen::MatrixXd::Zero(v1.rows(), v1.cols());
  Eigen::MatrixXd g2 = Eigen::MatrixXd::Zero(v2.rows(), v2.cols());
  if (n1 == 0.0 || n2 == 0.0) {
    return {g1, g2};
  }
  const double s = weighted_inner(v1, v2, b) - n1 * n2;
  g1 = 2.0 * s * (v2 - (n2 / n1) * v1) * b.asDiagonal();
  g2 = 2.0 * s * (v1 - (n1 / n2) * v2) * b.asDiagonal();
  return {g1, g2};
}

}  // namespace wpca
