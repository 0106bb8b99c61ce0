#include "oracles.hpp"
#include "wpca/error.hpp"
#include "wpca/transport.hpp"

#include <doctest.h>

#include <numeric>

using namespace wpca;

namespace {

Eigen::MatrixXd line(std::initializer_list<double> xs) {
  Eigen::MatrixXd m(1, static_cast<Index>(xs.size()));
  Index j = 0;
  for (double x : xs) m(0, j++) = x;
  return m;
}

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_SUITE("transport") {

TEST_CASE("sinkhorn small and large epsilon limits") {
  const Eigen::Vector2d half(0.5, 0.5);
  Eigen::MatrixXd m(2, 2);
  m << 0, 1,
       1, 0;
  const CostMatrix M(m);

  SinkhornOptions cold;
  cold.epsilon = 1e-3;
  const auto sharp = sinkhorn(half, half, M, cold);
  CHECK(sharp.converged);
  CHECK(sharp.log_domain);
  CHECK(max_abs(sharp.matrix - Eigen::Matrix2d::Identity() * 0.5) < 1e-6);
  CHECK(sharp.transport_cost < 1e-6);

  SinkhornOptions hot;
  hot.epsilon = 1e3;
  const auto flat = sinkhorn(half, half, M, hot);
  CHECK(!flat.log_domain);
  CHECK(max_abs(flat.matrix.array() - 0.25) < 1e-3);
}

TEST_CASE("sinkhorn is close to the exact cost") {
  oracle::Rng rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd Z = rng.normal_matrix(2, 4);
    const Eigen::MatrixXd X = rng.normal_matrix(2, 6);
    const Eigen::VectorXd r = rng.simplex(4);
    const Eigen::VectorXd c = rng.simplex(6);
    const CostMatrix M = cost_matrix(Z, X);
    SinkhornOptions opts;
    opts.epsilon = 0.01 * M.mean();
    const auto ent = sinkhorn(r, c, M, opts);
    const auto ex = exact_transport(r, c, M);
    CHECK(ent.converged);
    CHECK(std::abs(ent.transport_cost - ex.transport_cost) <= 0.01 * ex.transport_cost);
  }
}

TEST_CASE("sinkhorn errors and flags") {
  const Eigen::Vector2d half(0.5, 0.5);
  const CostMatrix M(Eigen::Matrix2d::Ones());
  SinkhornOptions bad;
  bad.epsilon = 0.0;
  CHECK_THROWS_AS(sinkhorn(half, half, M, bad), InvalidArgument);
  bad.epsilon = -1.0;
  CHECK_THROWS_AS(sinkhorn(half, half, M, bad), InvalidArgument);

  Eigen::MatrixXd far(2, 2);
  far << 0, 1e4,
         1e4, 0;
  SinkhornOptions plain;
  plain.epsilon = 1.0;
  plain.domain = SinkhornDomain::plain;
  CHECK_THROWS_AS(sinkhorn(Eigen::Vector2d(0.9, 0.1), half, CostMatrix(far), plain),
                  NumericalError);
  plain.domain = SinkhornDomain::automatic;
  CHECK_NOTHROW(sinkhorn(Eigen::Vector2d(0.9, 0.1), half, CostMatrix(far), plain));

  oracle::Rng rng(4);
  const CostMatrix R = cost_matrix(rng.normal_matrix(2, 5), rng.normal_matrix(2, 5));
  SinkhornOptions few;
  few.epsilon = 1e-3 * R.mean();
  few.max_iter = 2;
  few.epsilon_scaling = false;
  const auto partial = sinkhorn(rng.simplex(5), rng.simplex(5), R, few);
  CHECK(!partial.converged);
  CHECK(partial.iterations == 2);
}

TEST_CASE("sinkhorn residual is non-increasing") {
  oracle::Rng rng(8);
  for (auto domain : {SinkhornDomain::plain, SinkhornDomain::log}) {
    for (int trial = 0; trial < 5; ++trial) {
      const CostMatrix M = cost_matrix(rng.normal_matrix(2, 6), rng.normal_matrix(2, 7));
      SinkhornOptions opts;
      opts.epsilon = 0.05 * M.mean();
      opts.domain = domain;
      opts.epsilon_scaling = false;
      opts.record_residuals = true;
      opts.tol = 1e-12;
      opts.max_iter = 500;
      const auto plan = sinkhorn(rng.simplex(6), rng.simplex(7), M, opts);
      const auto& h = plan.residual_history;
      REQUIRE(h.size() > 2);
      for (std::size_t i = 1; i < h.size(); ++i) {
        CHECK(h[i] <= h[i - 1] + 1e-12);
      }
    }
  }
}

TEST_CASE("sinkhorn cost is monotone in epsilon") {
  oracle::Rng rng(13);
  const CostMatrix M = cost_matrix(rng.normal_matrix(2, 5), rng.normal_matrix(2, 6));
  const Eigen::VectorXd r = rng.simplex(5);
  const Eigen::VectorXd c = rng.simplex(6);
  double previous = 0.0;
  for (double scale : {0.005, 0.01, 0.05, 0.1, 0.5, 1.0, 5.0}) {
    SinkhornOptions opts;
    opts.epsilon = scale * M.mean();
    opts.tol = 1e-10;
    opts.max_iter = 100000;
    const double cost = sinkhorn(r, c, M, opts).transport_cost;
    CHECK(previous <= cost + 1e-9);
    previous = cost;
  }
}

TEST_CASE("sinkhorn is deterministic and warm starts agree") {
  oracle::Rng rng(17);
  const CostMatrix M = cost_matrix(rng.normal_matrix(2, 5), rng.normal_matrix(2, 6));
  const Eigen::VectorXd r = rng.simplex(5);
  const Eigen::VectorXd c = rng.simplex(6);
  SinkhornOptions opts;
  opts.epsilon = 0.1 * M.mean();
  const auto a = sinkhorn(r, c, M, opts);
  const auto b = sinkhorn(r, c, M, opts);
  CHECK((a.matrix.array() == b.matrix.array()).all());

  SinkhornState state;
  const auto first = sinkhorn(r, c, M, opts, &state);
  const auto again = sinkhorn(r, c, M, opts, &state);
  CHECK(again.iterations <= 1);
  CHECK(max_abs(first.matrix - again.matrix) < 1e-6);
}

TEST_CASE("over-relaxed sinkhorn reaches the same plan") {
  oracle::Rng rng(29);
  for (int trial = 0; trial < 10; ++trial) {
    const CostMatrix M = cost_matrix(rng.normal_matrix(2, 12), rng.normal_matrix(2, 9));
    const Eigen::VectorXd r = rng.simplex(12);
    const Eigen::VectorXd c = rng.simplex(9);
    SinkhornOptions opts;
    opts.epsilon = 0.02 * M.mean();
    opts.tol = 1e-11;
    opts.max_iter = 200000;
    opts.domain = SinkhornDomain::plain;
    const auto plain = sinkhorn(r, c, M, opts);
    for (double omega : {0.7, 1.5, 1.8}) {
      opts.relaxation = omega;
      const auto relaxed = sinkhorn(r, c, M, opts);
      CHECK(relaxed.converged);
      CHECK(max_abs(relaxed.matrix - plain.matrix) < 1e-9);
      // The last update is a plain row scaling.
      CHECK((relaxed.matrix.rowwise().sum() - r).cwiseAbs().maxCoeff() < 1e-14);
    }
  }
  SinkhornOptions bad;
  bad.epsilon = 1.0;
  bad.relaxation = 2.0;
  CHECK_THROWS_AS(sinkhorn(Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1),
                           cost_matrix(Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Zero(1, 1)), bad),
                  InvalidArgument);
}

TEST_CASE("exact transport examples") {
  const auto split = exact_transport(Eigen::VectorXd::Ones(1), Eigen::Vector2d(0.5, 0.5),
                                     cost_matrix(line({0}), line({-1, 1})));
  CHECK(split.matrix(0, 0) == doctest::Approx(0.5));
  CHECK(split.matrix(0, 1) == doctest::Approx(0.5));
  CHECK(split.transport_cost == doctest::Approx(1.0));

  const Eigen::Vector3d third = Eigen::Vector3d::Constant(1.0 / 3.0);
  const auto same = exact_transport(third, third, cost_matrix(line({0, 1, 5}), line({0, 1, 5})));
  CHECK(max_abs(same.matrix - Eigen::Matrix3d::Identity() / 3.0) < 1e-15);
  CHECK(same.transport_cost == 0.0);

  oracle::Rng rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd x = rng.normal_matrix(1, 5);
    Eigen::MatrixXd y = rng.normal_matrix(1, 5);
    const Eigen::VectorXd u = Eigen::VectorXd::Constant(5, 0.2);
    const double cost = exact_transport(u, u, cost_matrix(x, y)).transport_cost;
    std::vector<double> xs(x.data(), x.data() + 5);
    std::vector<double> ys(y.data(), y.data() + 5);
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    double expected = 0.0;
    for (int i = 0; i < 5; ++i) expected += 0.2 * (xs[i] - ys[i]) * (xs[i] - ys[i]);
    CHECK(std::abs(cost - expected) <= 1e-9);
  }
}

TEST_CASE("exact transport matches cycle cancelling") {
  oracle::Rng rng(29);
  for (int trial = 0; trial < 30; ++trial) {
    const Index p = rng.integer(1, 8);
    const Index n = rng.integer(1, 8);
    const Eigen::MatrixXd Z = rng.normal_matrix(2, p);
    const Eigen::MatrixXd X = rng.normal_matrix(2, n);
    const Eigen::VectorXd r = rng.simplex(p);
    const Eigen::VectorXd c = rng.simplex(n);
    const CostMatrix M = cost_matrix(Z, X);
    const auto plan = exact_transport(r, c, M);
    const Eigen::MatrixXd ref = oracle::cycle_cancel_transport(r, c, M.entries());
    CHECK(std::abs(plan.transport_cost - ref.cwiseProduct(M.entries()).sum()) <= 1e-8);
    CHECK(plan.marginal_residual <= 1e-12);
    CHECK(plan.matrix.minCoeff() >= 0.0);
    // Vertex: at most p + n - 1 nonzero entries.
    CHECK((plan.matrix.array() > 0.0).count() <= p + n - 1);
  }
}

TEST_CASE("exact plans are cyclically monotone") {
  oracle::Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const Index p = rng.integer(2, 9);
    const Index n = rng.integer(2, 9);
    const CostMatrix M = cost_matrix(rng.normal_matrix(3, p), rng.normal_matrix(3, n));
    const auto plan = exact_transport(rng.simplex(p), rng.simplex(n), M);
    const auto& P = plan.matrix;
    for (Index k = 0; k < p; ++k)
      for (Index j = 0; j < n; ++j)
        for (Index k2 = 0; k2 < p; ++k2)
          for (Index j2 = 0; j2 < n; ++j2) {
            if (P(k, j) > 0 && P(k2, j2) > 0) {
              CHECK(M(k, j) + M(k2, j2) <= M(k, j2) + M(k2, j) + 1e-8);
            }
          }
  }
}

TEST_CASE("exact transport handles degenerate and zero-weight marginals") {
  Eigen::MatrixXd grid(1, 4);
  grid << 0, 1, 2, 3;
  const Eigen::Vector4d a(0.25, 0.25, 0.25, 0.25);
  const Eigen::Vector4d b(0.5, 0.0, 0.0, 0.5);
  const auto plan = exact_transport(a, b, cost_matrix(grid, grid));
  CHECK(plan.transport_cost == doctest::Approx(0.5));
  CHECK(plan.matrix.col(1).sum() == 0.0);

  const Index big = 1001;
  CHECK_THROWS_AS(exact_transport(Eigen::VectorXd::Constant(big, 1.0 / big),
                                  Eigen::VectorXd::Constant(big, 1.0 / big),
                                  CostMatrix(Eigen::MatrixXd::Zero(big, big))),
                  InvalidArgument);
}

TEST_CASE("exact transport on a larger problem") {
  oracle::Rng rng(37);
  const Eigen::MatrixXd Z = rng.normal_matrix(2, 120);
  const Eigen::MatrixXd X = rng.normal_matrix(2, 90);
  const Eigen::VectorXd r = rng.simplex(120);
  const Eigen::VectorXd c = rng.simplex(90);
  const CostMatrix M = cost_matrix(Z, X);
  const auto plan = exact_transport(r, c, M);
  CHECK(plan.marginal_residual < 1e-12);
  SinkhornOptions opts;
  opts.epsilon = 1e-3 * M.mean();
  const auto ent = sinkhorn(r, c, M, opts);
  CHECK(plan.transport_cost <= ent.transport_cost + 1e-9);
  CHECK(ent.transport_cost <= 1.02 * plan.transport_cost);
}

TEST_CASE("w2_squared") {
  const auto nu = DiscreteMeasure::dirac(Eigen::Vector2d(0, 0));
  const auto eta = DiscreteMeasure::dirac(Eigen::Vector2d(2, 0));
  CHECK(w2_squared(nu, eta) == doctest::Approx(4.0));
  CHECK(w2_squared(nu, nu) == 0.0);

  oracle::Rng rng(41);
  for (int trial = 0; trial < 5; ++trial) {
    DiscreteMeasure a(rng.normal_matrix(2, 6), rng.simplex(6));
    DiscreteMeasure b(rng.normal_matrix(2, 5), rng.simplex(5));
    const double ex = w2_squared(a, b);
    CHECK(ex == doctest::Approx(w2_squared(b, a)).epsilon(1e-12));
    CHECK(w2_squared(a, a) <= 1e-15);
    const double mean_cost = cost_matrix(a.locations(), b.locations()).mean();
    const double ent = w2_squared(a, b, TransportMethod::entropic(1e-2 * mean_cost));
    CHECK(std::abs(ent - ex) <= 0.02 * ex);
  }
  CHECK_THROWS_AS(w2_squared(nu, DiscreteMeasure::dirac(Eigen::Vector3d(0, 0, 0))),
                  InvalidArgument);
}

TEST_CASE("barycentric projection examples") {
  TransportPlan flat;
  flat.matrix = Eigen::Matrix2d::Constant(0.25);
  flat.row_marginal = Eigen::Vector2d(0.5, 0.5);
  flat.col_marginal = Eigen::Vector2d(0.5, 0.5);
  const auto map = barycentric_projection(flat, line({0, 1}), line({0, 1}));
  CHECK(map.images(0, 0) == doctest::Approx(0.5));
  CHECK(map.images(0, 1) == doctest::Approx(0.5));

  TransportPlan diag;
  diag.matrix = Eigen::Matrix3d::Identity() / 3.0;
  diag.row_marginal = Eigen::Vector3d::Constant(1.0 / 3.0);
  diag.col_marginal = diag.row_marginal;
  const Eigen::MatrixXd targets = line({4, -2, 7});
  CHECK(max_abs(barycentric_projection(diag, line({0, 1, 2}), targets).images - targets) < 1e-15);

  oracle::Rng rng(43);
  TransportPlan random;
  random.matrix = Eigen::MatrixXd::Random(3, 4).cwiseAbs();
  random.matrix /= random.matrix.sum();
  random.row_marginal = random.matrix.rowwise().sum();
  random.col_marginal = random.matrix.colwise().sum().transpose();
  const Eigen::MatrixXd X = rng.normal_matrix(2, 4);
  const auto rmap = barycentric_projection(random, rng.normal_matrix(2, 3), X);
  for (Index k = 0; k < 3; ++k) {
    Eigen::Vector2d avg = Eigen::Vector2d::Zero();
    for (Index j = 0; j < 4; ++j) avg += random.matrix(k, j) * X.col(j);
    avg /= random.row_marginal[k];
    CHECK((rmap.images.col(k) - avg).norm() <= 1e-12);
  }
}

TEST_CASE("barycentric projection zero-weight rows") {
  TransportPlan plan;
  plan.matrix = Eigen::Matrix2d::Zero();
  plan.matrix(0, 0) = 0.5;
  plan.matrix(0, 1) = 0.5;
  plan.row_marginal = Eigen::Vector2d(1.0, 0.0);
  plan.col_marginal = Eigen::Vector2d(0.5, 0.5);
  const auto map = barycentric_projection(plan, line({3, 9}), line({0, 1}));
  CHECK(map.identity_fallback[1]);
  CHECK(map.images(0, 1) == 9.0);

  plan.matrix(1, 1) = 0.1;
  CHECK_THROWS_AS(barycentric_projection(plan, line({3, 9}), line({0, 1})), InvalidArgument);
}

TEST_CASE("barycentric map is optimal onto its image") {
  oracle::Rng rng(47);
  for (int trial = 0; trial < 10; ++trial) {
    const Index p = rng.integer(2, 8);
    const Index n = rng.integer(2, 8);
    const Eigen::MatrixXd Y = rng.normal_matrix(2, p);
    const Eigen::MatrixXd X = rng.normal_matrix(2, n);
    const Eigen::VectorXd b = rng.simplex(p);
    const auto plan = exact_transport(b, rng.simplex(n), cost_matrix(Y, X));
    const auto map = barycentric_projection(plan, Y, X);
    double map_cost = 0.0;
    for (Index k = 0; k < p; ++k) map_cost += b[k] * (Y.col(k) - map.images.col(k)).squaredNorm();
    const double ot = exact_transport(b, b, cost_matrix(Y, map.images)).transport_cost;
    CHECK(std::abs(ot - map_cost) <= 1e-8);
  }
}

TEST_CASE("no-splitting plans reproduce the Monge map") {
  oracle::Rng rng(53);
  const Eigen::MatrixXd Y = rng.normal_matrix(2, 6);
  const Eigen::VectorXd b = Eigen::VectorXd::Constant(6, 1.0 / 6.0);
  const Eigen::MatrixXd X = Y.colwise() + Eigen::Vector2d(0.3, -0.2);
  const auto plan = exact_transport(b, b, cost_matrix(Y, X));
  CHECK(max_abs(barycentric_projection(plan, Y, X).images - X) < 1e-12);
}

}  // TEST_SUITE
