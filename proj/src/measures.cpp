#include "wpca/measures.hpp"

#include "wpca/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace wpca {

namespace {

void check_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) {
    throw InvalidArgument(std::string(what) + " contain non-finite values");
  }
}

// Zero out tiny weights and renormalize.
void clamp_weights(Eigen::VectorXd& w, double clamp) {
  bool changed = false;
  for (Index k = 0; k < w.size(); ++k) {
    if (w[k] < clamp) {
      changed = changed || w[k] != 0.0;
      w[k] = 0.0;
    }
  }
  if (changed) {
    const double s = w.sum();
    if (s <= 0.0) {
      throw InvalidArgument("weights vanish after clamping");
    }
    w /= s;
  }
}

}  // namespace

void check_simplex(const Eigen::VectorXd& w, double tol) {
  if (w.size() == 0) {
    throw InvalidArgument("empty weight vector");
  }
  if (!w.allFinite()) {
    throw InvalidArgument("weights contain non-finite values");
  }
  if (w.minCoeff() < 0.0) {
    throw InvalidArgument("negative weight");
  }
  const double s = w.sum();
  if (std::abs(s - 1.0) > tol) {
    std::ostringstream os;
    os << "weights are off the simplex (sum = " << s << ")";
    throw InvalidArgument(os.str());
  }
}

DiscreteMeasure::DiscreteMeasure(Eigen::MatrixXd locations,
                                 Eigen::VectorXd weights, WeightTolerance tol)
    : locations_(std::move(locations)), weights_(std::move(weights)) {
  if (locations_.rows() < 1 || locations_.cols() < 1) {
    throw InvalidArgument("a measure needs d >= 1 and n >= 1");
  }
  if (weights_.size() != locations_.cols()) {
    throw InvalidArgument("size mismatch between locations and weights");
  }
  check_finite(locations_, "locations");
  check_simplex(weights_, tol.simplex);
  clamp_weights(weights_, tol.clamp);
}

DiscreteMeasure DiscreteMeasure::normalized(Eigen::MatrixXd locations,
                                            Eigen::VectorXd weights,
                                            WeightTolerance tol) {
  if (!weights.allFinite() || (weights.size() > 0 && weights.minCoeff() < 0)) {
    throw InvalidArgument("weights must be finite and nonnegative");
  }
  const double s = weights.sum();
  if (!(s > 0.0)) {
    throw InvalidArgument("weights sum to zero");
  }
  weights /= s;
  return DiscreteMeasure(std::move(locations), std::move(weights), tol);
}

DiscreteMeasure DiscreteMeasure::uniform(Eigen::MatrixXd locations) {
  const Index n = locations.cols();
  if (n < 1) {
    throw InvalidArgument("a measure needs d >= 1 and n >= 1");
  }
  Eigen::VectorXd w = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  return DiscreteMeasure(std::move(locations), std::move(w));
}

DiscreteMeasure DiscreteMeasure::dirac(const Eigen::VectorXd& point) {
  return DiscreteMeasure(Eigen::MatrixXd(point), Eigen::VectorXd::Ones(1));
}

bool DiscreteMeasure::has_null_atoms() const {
  return (weights_.array() == 0.0).any();
}

DiscreteMeasure DiscreteMeasure::without_null_atoms() const {
  std::vector<Index> keep;
  for (Index k = 0; k < size(); ++k) {
    if (weights_[k] > 0.0) keep.push_back(k);
  }
  Eigen::MatrixXd loc(dim(), static_cast<Index>(keep.size()));
  Eigen::VectorXd w(static_cast<Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) {
    loc.col(static_cast<Index>(i)) = locations_.col(keep[i]);
    w[static_cast<Index>(i)] = weights_[keep[i]];
  }
  return DiscreteMeasure(std::move(loc), std::move(w));
}

DiscreteMeasure DiscreteMeasure::translated(const Eigen::VectorXd& shift) const {
  if (shift.size() != dim()) {
    throw InvalidArgument("dimension mismatch");
  }
  Eigen::MatrixXd loc = locations_.colwise() + shift;
  return DiscreteMeasure(std::move(loc), weights_);
}

VelocityField::VelocityField(Eigen::MatrixXd vectors)
    : vectors_(std::move(vectors)) {
  check_finite(vectors_, "velocity vectors");
}

VelocityField VelocityField::zeros(Index dim, Index size) {
  return VelocityField(Eigen::MatrixXd::Zero(dim, size));
}

VelocityField VelocityField::translation(const Eigen::VectorXd& shift,
                                         Index size) {
  return VelocityField(shift.replicate(1, size));
}

CostMatrix::CostMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
  check_finite(entries_, "costs");
  if (entries_.size() > 0 && entries_.minCoeff() < 0.0) {
    throw InvalidArgument("costs must be nonnegative");
  }
}

double CostMatrix::median() const {
  if (entries_.size() == 0) return 0.0;
  std::vector<double> v(entries_.data(), entries_.data() + entries_.size());
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

CostMatrix cost_matrix(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& X) {
  if (Z.rows() != X.rows()) {
    throw InvalidArgument("dimension mismatch");
  }
  check_finite(Z, "locations");
  check_finite(X, "locations");
  const Index p = Z.cols();
  const Index n = X.cols();
  Eigen::MatrixXd M(p, n);
  for (Index j = 0; j < n; ++j) {
    for (Index k = 0; k < p; ++k) {
      M(k, j) = (Z.col(k) - X.col(j)).squaredNorm();
    }
  }
  return CostMatrix(std::move(M));
}

double weighted_inner(const Eigen::MatrixXd& u, const Eigen::MatrixXd& v,
                      const Eigen::VectorXd& b) {
  if (u.rows() != v.rows() || u.cols() != v.cols() || u.cols() != b.size()) {
    throw InvalidArgument("size mismatch");
  }
  return (u.cwiseProduct(v).colwise().sum().transpose().array() * b.array()).sum();
}

double weighted_inner(const VelocityField& u, const VelocityField& v,
                      const Eigen::VectorXd& b) {
  return weighted_inner(u.vectors(), v.vectors(), b);
}

double weighted_norm(const Eigen::MatrixXd& u, const Eigen::VectorXd& b) {
  return std::sqrt(std::max(0.0, weighted_inner(u, u, b)));
}

double weighted_norm(const VelocityField& u, const Eigen::VectorXd& b) {
  return weighted_norm(u.vectors(), b);
}

Eigen::VectorXd mean_point(const DiscreteMeasure& m) {
  return m.locations() * m.weights();
}

}  // namespace wpca
