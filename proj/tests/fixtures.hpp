#pragma once

// Synthetic datasets shared by the unit and acceptance tests.

#include "oracles.hpp"
#include "wpca/measures.hpp"

#include <cmath>
#include <vector>

namespace fixture {

using wpca::DiscreteMeasure;
using Eigen::Index;

// Four measures of three atoms drifting to the right while spreading out.
inline std::vector<DiscreteMeasure> drifting_triangles() {
  std::vector<DiscreteMeasure> out;
  const double pi = std::acos(-1.0);
  for (int i = 0; i < 4; ++i) {
    const double spread = 0.5 + 0.5 * i;
    Eigen::MatrixXd loc(2, 3);
    for (int k = 0; k < 3; ++k) {
      const double a = 2.0 * pi * k / 3.0 + 0.3 * i;
      loc.col(k) << 2.5 * i + spread * std::cos(a), spread * std::sin(a);
    }
    out.push_back(DiscreteMeasure::uniform(loc));
  }
  return out;
}

// Three measures of five weighted atoms on ellipses of varying size,
// eccentricity and orientation.
inline std::vector<DiscreteMeasure> ellipses() {
  const double pi = std::acos(-1.0);
  const double axes[3][3] = {{1.0, 0.6, 0.1}, {2.2, 1.0, 0.35}, {3.4, 1.3, 0.5}};
  const Eigen::VectorXd w = (Eigen::VectorXd(5) << 0.3, 0.1, 0.2, 0.25, 0.15).finished();
  std::vector<DiscreteMeasure> out;
  for (const auto& e : axes) {
    Eigen::MatrixXd loc(2, 5);
    for (int k = 0; k < 5; ++k) {
      const double a = 2.0 * pi * k / 5.0;
      const Eigen::Vector2d p(e[0] * std::cos(a), e[1] * std::sin(a));
      loc.col(k) << std::cos(e[2]) * p[0] - std::sin(e[2]) * p[1],
                    std::sin(e[2]) * p[0] + std::cos(e[2]) * p[1];
    }
    out.emplace_back(loc, w);
  }
  return out;
}

// 20 x 20 grayscale images of one stroke template under random
// translations and scalings. Faint pixels are cut to zero, so every image
// has a truncated support.
inline std::vector<Eigen::MatrixXd> blob_images(int count, std::uint64_t seed, Index size = 20) {
  // Polyline of a hooked stroke in template coordinates (pixels, centered).
  const std::vector<Eigen::Vector2d> knots{{-3.5, -5.0}, {2.5, -5.5}, {3.0, -1.0},
                                           {-1.0, 1.5}, {-2.0, 5.0}, {3.5, 5.0}};
  std::vector<Eigen::Vector2d> samples;
  for (std::size_t s = 0; s + 1 < knots.size(); ++s) {
    for (int q = 0; q < 12; ++q) samples.push_back(knots[s] + (knots[s + 1] - knots[s]) * (q / 12.0));
  }
  samples.push_back(knots.back());

  oracle::Rng rng(seed);
  std::vector<Eigen::MatrixXd> out;
  const double center = 0.5 * static_cast<double>(size);
  for (int i = 0; i < count; ++i) {
    const double scale = rng.uniform(0.75, 1.2);
    const Eigen::Vector2d shift(rng.uniform(-2.5, 2.5), rng.uniform(-2.0, 2.0));
    Eigen::MatrixXd img = Eigen::MatrixXd::Zero(size, size);
    for (Index r = 0; r < size; ++r) {
      for (Index c = 0; c < size; ++c) {
        const Eigen::Vector2d px(static_cast<double>(c) + 0.5 - center, static_cast<double>(r) + 0.5 - center);
        double v = 0.0;
        for (const auto& s : samples) v += std::exp(-(px - (scale * s + shift)).squaredNorm() / 1.5);
        img(r, c) = v;
      }
    }
    const double cut = 0.08 * img.maxCoeff();
    img = img.unaryExpr([cut](double v) { return v > cut ? v : 0.0; });
    out.push_back(img);
  }
  return out;
}

}  // namespace fixture
