#pragma once

#include "wpca/measures.hpp"

#include <utility>

namespace wpca {

/// Curve t -> (id - v1 + t (v1 + v2)) # base, t in [0, 1].
///
/// The curve is a generalized geodesic when id - v1 and id + v2 are optimal
/// maps out of the base measure; it is a true geodesic when in addition the
/// two fields are positively proportional.
class GeneralizedGeodesic {
 public:
  GeneralizedGeodesic() = default;
  GeneralizedGeodesic(DiscreteMeasure base, VelocityField v1, VelocityField v2);

  const DiscreteMeasure& base() const { return base_; }
  const VelocityField& v1() const { return v1_; }
  const VelocityField& v2() const { return v2_; }

  /// Z_t = Y - V1 + t (V1 + V2).
  Eigen::MatrixXd locations_at(double t) const;

 private:
  DiscreteMeasure base_;
  VelocityField v1_;
  VelocityField v2_;
};

/// Displacement interpolation along an exact optimal plan: one atom per
/// nonzero plan entry at (1-t) x + t y. Atoms closer than merge_tol are merged.
DiscreteMeasure mccann_interpolant(const DiscreteMeasure& nu,
                                   const DiscreteMeasure& eta, double t,
                                   double merge_tol = 1e-12);

DiscreteMeasure sample_geodesic(const GeneralizedGeodesic& g, double t);

/// Proportionality penalty (<v1,v2>_b - |v1|_b |v2|_b)^2.
double omega(const Eigen::MatrixXd& v1, const Eigen::MatrixXd& v2,
             const Eigen::VectorXd& b);

/// Gradient of omega with respect to the matrix entries of v1 and v2.
/// Zero when either field has zero norm.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> grad_omega(const Eigen::MatrixXd& v1,
                                                       const Eigen::MatrixXd& v2,
                                                       const Eigen::VectorXd& b);

/// Merge atoms closer than tol (Euclidean), summing their masses.
DiscreteMeasure merge_atoms(const Eigen::MatrixXd& locations,
                            const Eigen::VectorXd& masses, double tol);

}  // namespace wpca
