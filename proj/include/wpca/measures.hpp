#pragma once

#include <Eigen/Dense>

#include <vector>

namespace wpca {

using Index = Eigen::Index;

/// Tolerances used when validating and normalizing weight vectors.
struct WeightTolerance {
  double simplex = 1e-9;  // allowed |sum - 1|
  double clamp = 1e-12;   // weights below this are set to zero
};

/// Weighted point cloud in R^d: locations stored column-major (d x n) with
/// one probability mass per column.
///
/// Weights are validated on construction. Tiny weights (below the clamp
/// tolerance) are zeroed and the vector renormalized; such atoms stay in the
/// support and can be queried with has_null_atoms().
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;
  DiscreteMeasure(Eigen::MatrixXd locations, Eigen::VectorXd weights,
                  WeightTolerance tol = {});

  /// Rescales arbitrary nonnegative weights onto the simplex first.
  static DiscreteMeasure normalized(Eigen::MatrixXd locations,
                                    Eigen::VectorXd weights,
                                    WeightTolerance tol = {});
  static DiscreteMeasure uniform(Eigen::MatrixXd locations);
  static DiscreteMeasure dirac(const Eigen::VectorXd& point);

  const Eigen::MatrixXd& locations() const { return locations_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  Index dim() const { return locations_.rows(); }
  Index size() const { return locations_.cols(); }
  bool empty() const { return locations_.cols() == 0; }

  bool has_null_atoms() const;
  /// Copy with zero-weight atoms removed.
  DiscreteMeasure without_null_atoms() const;
  DiscreteMeasure translated(const Eigen::VectorXd& shift) const;

 private:
  Eigen::MatrixXd locations_;
  Eigen::VectorXd weights_;
};

/// One displacement vector per atom of a base measure (d x p).
class VelocityField {
 public:
  VelocityField() = default;
  explicit VelocityField(Eigen::MatrixXd vectors);

  static VelocityField zeros(Index dim, Index size);
  /// The same vector attached to every atom.
  static VelocityField translation(const Eigen::VectorXd& shift, Index size);

  const Eigen::MatrixXd& vectors() const { return vectors_; }
  Index dim() const { return vectors_.rows(); }
  Index size() const { return vectors_.cols(); }

 private:
  Eigen::MatrixXd vectors_;
};

/// Squared Euclidean distances between two point sets (p x n).
class CostMatrix {
 public:
  CostMatrix() = default;
  /// Wraps precomputed costs; entries must be finite and nonnegative.
  explicit CostMatrix(Eigen::MatrixXd entries);

  const Eigen::MatrixXd& entries() const { return entries_; }
  Index rows() const { return entries_.rows(); }
  Index cols() const { return entries_.cols(); }
  double operator()(Index r, Index c) const { return entries_(r, c); }
  double mean() const { return entries_.mean(); }
  double median() const;
  double max() const { return entries_.maxCoeff(); }

 private:
  Eigen::MatrixXd entries_;
};

/// ||z_k - x_j||^2 for every column pair of Z (d x p) and X (d x n).
CostMatrix cost_matrix(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& X);

/// L2(b) inner product sum_k b_k <u_k, v_k>.
double weighted_inner(const Eigen::MatrixXd& u, const Eigen::MatrixXd& v,
                      const Eigen::VectorXd& b);
double weighted_inner(const VelocityField& u, const VelocityField& v,
                      const Eigen::VectorXd& b);
double weighted_norm(const Eigen::MatrixXd& u, const Eigen::VectorXd& b);
double weighted_norm(const VelocityField& u, const Eigen::VectorXd& b);

Eigen::VectorXd mean_point(const DiscreteMeasure& m);

/// Weights checked against the simplex; throws InvalidArgument otherwise.
void check_simplex(const Eigen::VectorXd& w, double tol = 1e-9);

}  // namespace wpca
