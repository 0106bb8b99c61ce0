#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace wpca {

struct KMeansOptions {
  Eigen::Index k = 1;
  std::uint64_t seed = 0;
  int max_iter = 100;
  double move_tol = 1e-8;  // stop when no centroid moves farther than this
};

struct KMeansResult {
  Eigen::MatrixXd centroids;  // d x k' (empty clusters dropped, k' <= k)
  Eigen::VectorXd mass;       // total point weight per centroid
  std::vector<Eigen::Index> assignment;  // per point, index into centroids
  std::vector<double> wcss_trace;        // weighted within-cluster sum of squares
  int iterations = 0;
};

/// Weighted Lloyd iterations from a seeded k-means++ initialization.
/// Deterministic for a fixed seed; ties go to the lowest centroid index.
KMeansResult weighted_kmeans(const Eigen::MatrixXd& points,
                             const Eigen::VectorXd& weights,
                             const KMeansOptions& opts);

/// Uniform double in [0, 1) from 53 random bits; portable across standard
/// library implementations, unlike std::uniform_real_distribution.
double unit_uniform(std::uint64_t bits);

}  // namespace wpca
