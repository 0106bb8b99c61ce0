#include "wpca/kmeans.hpp"

#include "wpca/error.hpp"

#include <limits>
#include <random>

namespace wpca {

double unit_uniform(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

namespace {

using Eigen::Index;

// Sample an index with probability proportional to score.
Index sample_index(const Eigen::VectorXd& score, std::mt19937_64& rng) {
  const double total = score.sum();
  if (!(total > 0.0)) return -1;
  const double target = unit_uniform(rng()) * total;
  double acc = 0.0;
  Index last_positive = -1;
  for (Index i = 0; i < score.size(); ++i) {
    if (score[i] <= 0.0) continue;
    acc += score[i];
    last_positive = i;
    if (acc > target) return i;
  }
  return last_positive;
}

double assign(const Eigen::MatrixXd& points, const Eigen::VectorXd& weights,
              const Eigen::MatrixXd& centroids, std::vector<Index>& assignment) {
  double wcss = 0.0;
  for (Index j = 0; j < points.cols(); ++j) {
    Index best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Index c = 0; c < centroids.cols(); ++c) {
      const double d = (points.col(j) - centroids.col(c)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    assignment[static_cast<std::size_t>(j)] = best;
    wcss += weights[j] * best_d;
  }
  return wcss;
}

}  // namespace

KMeansResult weighted_kmeans(const Eigen::MatrixXd& points,
                             const Eigen::VectorXd& weights,
                             const KMeansOptions& opts) {
  const Index n = points.cols();
  const Index d = points.rows();
  if (opts.k < 1) throw InvalidArgument("k must be at least 1");
  if (n < 1 || weights.size() != n) throw InvalidArgument("size mismatch");
  if (weights.minCoeff() < 0.0 || !(weights.sum() > 0.0)) {
    throw InvalidArgument("k-means weights must be nonnegative with positive sum");
  }

  std::mt19937_64 rng(opts.seed);
  // k-means++ seeding on the weighted cloud.
  std::vector<Index> chosen;
  chosen.push_back(sample_index(weights, rng));
  Eigen::VectorXd dist2 = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  while (static_cast<Index>(chosen.size()) < opts.k) {
    const Index last = chosen.back();
    for (Index j = 0; j < n; ++j) {
      dist2[j] = std::min(dist2[j], (points.col(j) - points.col(last)).squaredNorm());
    }
    const Index next = sample_index(weights.cwiseProduct(dist2), rng);
    if (next < 0) break;  // every remaining point coincides with a centroid
    chosen.push_back(next);
  }
  Eigen::MatrixXd centroids(d, static_cast<Index>(chosen.size()));
  for (std::size_t c = 0; c < chosen.size(); ++c) {
    centroids.col(static_cast<Index>(c)) = points.col(chosen[c]);
  }

  KMeansResult res;
  res.assignment.assign(static_cast<std::size_t>(n), 0);
  res.wcss_trace.push_back(assign(points, weights, centroids, res.assignment));
  for (int it = 0; it < opts.max_iter; ++it) {
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(d, centroids.cols());
    Eigen::VectorXd mass = Eigen::VectorXd::Zero(centroids.cols());
    for (Index j = 0; j < n; ++j) {
      const Index c = res.assignment[static_cast<std::size_t>(j)];
      sums.col(c) += weights[j] * points.col(j);
      mass[c] += weights[j];
    }
    double moved = 0.0;
    for (Index c = 0; c < centroids.cols(); ++c) {
      if (mass[c] > 0.0) {
        const Eigen::VectorXd next = sums.col(c) / mass[c];
        moved = std::max(moved, (next - centroids.col(c)).norm());
        centroids.col(c) = next;
      }
    }
    res.wcss_trace.push_back(assign(points, weights, centroids, res.assignment));
    res.iterations = it + 1;
    if (moved < opts.move_tol) break;
  }

  // Drop clusters that ended up without mass.
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(centroids.cols());
  for (Index j = 0; j < n; ++j) mass[res.assignment[static_cast<std::size_t>(j)]] += weights[j];
  std::vector<Index> remap(static_cast<std::size_t>(centroids.cols()), -1);
  Index kept = 0;
  for (Index c = 0; c < centroids.cols(); ++c) {
    if (mass[c] > 0.0) remap[static_cast<std::size_t>(c)] = kept++;
  }
  res.centroids.resize(d, kept);
  res.mass.resize(kept);
  for (Index c = 0; c < centroids.cols(); ++c) {
    const Index r = remap[static_cast<std::size_t>(c)];
    if (r >= 0) {
      res.centroids.col(r) = centroids.col(c);
      res.mass[r] = mass[c];
    }
  }
  for (auto& a : res.assignment) a = remap[static_cast<std::size_t>(a)];
  if (kept < centroids.cols()) {
    // Zero-weight points may sit in a dropped cluster.
    assign(points, weights, res.centroids, res.assignment);
  }
  return res;
}

}  // namespace wpca
