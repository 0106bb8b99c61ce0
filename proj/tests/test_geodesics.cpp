#include "oracles.hpp"
#include "wpca/error.hpp"
#include "wpca/geodesics.hpp"
#include "wpca/transport.hpp"

#include <doctest.h>

using namespace wpca;

namespace {

DiscreteMeasure uniform_line(std::initializer_list<double> xs) {
  Eigen::MatrixXd m(1, static_cast<Index>(xs.size()));
  Index j = 0;
  for (double x : xs) m(0, j++) = x;
  return DiscreteMeasure::uniform(m);
}

bool same_measure(const DiscreteMeasure& a, const DiscreteMeasure& b, double tol) {
  return w2_squared(a, b) <= tol;
}

}  // namespace

TEST_SUITE("geodesics") {

TEST_CASE("mccann interpolant endpoints and midpoint") {
  oracle::Rng rng(3);
  DiscreteMeasure nu(rng.normal_matrix(2, 4), rng.simplex(4));
  DiscreteMeasure eta(rng.normal_matrix(2, 3), rng.simplex(3));
  CHECK(same_measure(mccann_interpolant(nu, eta, 0.0), nu, 1e-14));
  CHECK(same_measure(mccann_interpolant(nu, eta, 1.0), eta, 1e-14));

  const auto mid = mccann_interpolant(DiscreteMeasure::dirac(Eigen::Vector2d(0, 0)),
                                      DiscreteMeasure::dirac(Eigen::Vector2d(2, 0)), 0.5);
  REQUIRE(mid.size() == 1);
  CHECK(mid.locations().col(0).isApprox(Eigen::Vector2d(1, 0)));

  CHECK_THROWS_AS(mccann_interpolant(nu, eta, 1.5), InvalidArgument);
  CHECK_THROWS_AS(mccann_interpolant(nu, eta, -0.1), InvalidArgument);
}

TEST_CASE("mccann interpolant handles mass splitting") {
  const auto g = mccann_interpolant(DiscreteMeasure::dirac(Eigen::VectorXd::Zero(1)),
                                    uniform_line({-1, 1}), 0.5);
  REQUIRE(g.size() == 2);
  CHECK(std::abs(g.locations()(0, 0)) == doctest::Approx(0.5));
  CHECK(g.weights()[0] == doctest::Approx(0.5));
}

TEST_CASE("mccann interpolant is a constant-speed geodesic in 1-D") {
  const auto nu = uniform_line({0.0, 1.0, 3.0});
  const auto eta = uniform_line({-2.0, 2.5, 4.0});
  const double total = std::sqrt(oracle::w2_1d({{0, 1.0 / 3}, {1, 1.0 / 3}, {3, 1.0 / 3}},
                                               {{-2, 1.0 / 3}, {2.5, 1.0 / 3}, {4, 1.0 / 3}}));
  const std::vector<double> times{0.0, 0.25, 0.5, 0.75, 1.0};
  for (double s : times) {
    for (double t : times) {
      const double w = std::sqrt(w2_squared(mccann_interpolant(nu, eta, s),
                                            mccann_interpolant(nu, eta, t)));
      CHECK(std::abs(w - std::abs(t - s) * total) <= 1e-8);
    }
  }
}

TEST_CASE("sample_geodesic") {
  oracle::Rng rng(5);
  DiscreteMeasure base(rng.normal_matrix(2, 5), rng.simplex(5));
  const VelocityField v1(rng.normal_matrix(2, 5));
  const VelocityField v2(rng.normal_matrix(2, 5));
  const GeneralizedGeodesic g(base, v1, v2);
  CHECK(sample_geodesic(g, 0.0).locations().isApprox(base.locations() - v1.vectors()));
  CHECK(sample_geodesic(g, 1.0).locations().isApprox(base.locations() + v2.vectors()));
  for (double t : {0.0, 0.3, 1.0}) {
    CHECK((sample_geodesic(g, t).weights() - base.weights()).cwiseAbs().maxCoeff() == 0.0);
  }
  const GeneralizedGeodesic still(base, VelocityField::zeros(2, 5), VelocityField::zeros(2, 5));
  CHECK(sample_geodesic(still, 0.7).locations() == base.locations());
  CHECK_THROWS_AS(sample_geodesic(g, 1.01), InvalidArgument);
  CHECK_THROWS_AS(GeneralizedGeodesic(base, VelocityField::zeros(2, 4), v2), InvalidArgument);
}

TEST_CASE("proportional optimal fields give a true geodesic") {
  oracle::Rng rng(7);
  const Eigen::MatrixXd Y = rng.normal_matrix(2, 6);
  const DiscreteMeasure base(Y, rng.simplex(6));
  Eigen::Matrix2d A;
  A << 0.6, 0.2,
       0.2, 0.3;
  // id - 0.5 A and id + 2 A are gradients of convex quadratics.
  const VelocityField v1(0.5 * A * Y);
  const VelocityField v2(2.0 * A * Y);
  const GeneralizedGeodesic g(base, v1, v2);
  const double total = std::sqrt(w2_squared(sample_geodesic(g, 0.0), sample_geodesic(g, 1.0)));
  for (double s : {0.0, 0.2, 0.5, 0.9}) {
    for (double t : {0.1, 0.4, 1.0}) {
      const double w = std::sqrt(w2_squared(sample_geodesic(g, s), sample_geodesic(g, t)));
      CHECK(std::abs(w - std::abs(t - s) * total) <= 1e-6);
    }
  }
}

TEST_CASE("omega examples") {
  oracle::Rng rng(11);
  const Eigen::VectorXd b = rng.simplex(5);
  const Eigen::MatrixXd v = rng.normal_matrix(2, 5);
  CHECK(omega(v, 3.0 * v, b) <= 1e-24);
  const auto [g1, g2] = grad_omega(v, 3.0 * v, b);
  CHECK(g1.cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(g2.cwiseAbs().maxCoeff() <= 1e-12);

  const double n2 = weighted_inner(v, v, b);
  CHECK(omega(v, -v, b) == doctest::Approx(4.0 * n2 * n2));

  const auto [z1, z2] = grad_omega(Eigen::MatrixXd::Zero(2, 5), v, b);
  CHECK(z1.isZero());
  CHECK(z2.isZero());
  CHECK(omega(Eigen::MatrixXd::Zero(2, 5), v, b) == 0.0);
}

TEST_CASE("omega gradient matches finite differences") {
  oracle::Rng rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd b = rng.simplex(5);
    const Eigen::MatrixXd v1 = rng.normal_matrix(2, 5);
    const Eigen::MatrixXd v2 = rng.normal_matrix(2, 5);
    const auto [g1, g2] = grad_omega(v1, v2, b);
    const auto fd1 = oracle::finite_difference([&](const Eigen::MatrixXd& x) { return omega(x, v2, b); }, v1);
    const auto fd2 = oracle::finite_difference([&](const Eigen::MatrixXd& x) { return omega(v1, x, b); }, v2);
    CHECK(oracle::relative_error(g1, fd1) <= 1e-5);
    CHECK(oracle::relative_error(g2, fd2) <= 1e-5);
  }
}

TEST_CASE("omega is homogeneous of degree four") {
  oracle::Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd b = rng.simplex(4);
    const Eigen::MatrixXd v1 = rng.normal_matrix(3, 4);
    const Eigen::MatrixXd v2 = rng.normal_matrix(3, 4);
    const double alpha = rng.uniform(0.1, 3.0);
    const double base = omega(v1, v2, b);
    CHECK(std::abs(omega(alpha * v1, alpha * v2, b) - std::pow(alpha, 4) * base) <=
          1e-9 * std::pow(alpha, 4) * base + 1e-15);
    CHECK(base >= 0.0);
  }
}

}  // TEST_SUITE
