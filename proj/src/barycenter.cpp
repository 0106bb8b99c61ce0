#include "wpca/barycenter.hpp"

#include "lp_simplex.hpp"
#include "parallel.hpp"
#include "wpca/error.hpp"
#include "wpca/geodesics.hpp"
#include "wpca/kmeans.hpp"

#include <cmath>
#include <functional>
#include <limits>

namespace wpca {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<double> resolve_lambdas(const std::vector<double>& given, std::size_t n) {
  if (given.empty()) return std::vector<double>(n, 1.0 / static_cast<double>(n));
  if (given.size() != n) {
    throw InvalidArgument("one barycenter weight per input measure is required");
  }
  Eigen::Map<const Eigen::VectorXd> l(given.data(), static_cast<Index>(n));
  check_simplex(l, 1e-9);
  return given;
}

// log sum_i exp(a_i + b_i) over an index list.
double lse_gather(const double* a, const std::vector<Index>& idx, const double* b) {
  double mx = kNegInf;
  for (std::size_t q = 0; q < idx.size(); ++q) mx = std::max(mx, a[idx[q]] + b[q]);
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (std::size_t q = 0; q < idx.size(); ++q) s += std::exp(a[idx[q]] + b[q] - mx);
  return mx + std::log(s);
}

}  // namespace

FixedSupportResult barycenter_fixed_support(const std::vector<Eigen::VectorXd>& histograms,
                                            const Eigen::MatrixXd& grid,
                                            const FixedSupportOptions& opts) {
  if (histograms.empty()) throw InvalidArgument("no input histograms");
  if (!(opts.epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  const Index p = grid.cols();
  const std::size_t N = histograms.size();
  for (const auto& h : histograms) {
    if (h.size() != p) throw InvalidArgument("histogram size does not match the grid");
    check_simplex(h, 1e-6);
  }
  const auto lambdas = resolve_lambdas(opts.lambdas, N);
  const double eps = opts.epsilon;

  // Symmetric log-kernel; column k holds log K(., k).
  const Eigen::MatrixXd logK = cost_matrix(grid, grid).entries() / -eps;

  std::vector<std::vector<Index>> support(N);
  std::vector<Eigen::VectorXd> log_h(N);
  std::vector<Eigen::VectorXd> log_v(N);
  for (std::size_t i = 0; i < N; ++i) {
    for (Index j = 0; j < p; ++j) {
      if (histograms[i][j] > 0.0) support[i].push_back(j);
    }
    const auto s = static_cast<Index>(support[i].size());
    log_h[i].resize(s);
    for (Index q = 0; q < s; ++q) log_h[i][q] = std::log(histograms[i][support[i][static_cast<std::size_t>(q)]]);
    log_v[i] = Eigen::VectorXd::Zero(s);
  }
  Eigen::MatrixXd log_u = Eigen::MatrixXd::Zero(p, static_cast<Index>(N));
  Eigen::MatrixXd log_Kv(p, static_cast<Index>(N));
  Eigen::VectorXd log_b(p);
  Eigen::VectorXd b_prev;

  FixedSupportResult res;
  for (int it = 0; it < opts.max_iter; ++it) {
    detail::parallel_for(N, [&](std::size_t i) {
      const auto& S = support[i];
      const double* lu = log_u.col(static_cast<Index>(i)).data();
      for (std::size_t q = 0; q < S.size(); ++q) {
        const double* lk = logK.col(S[q]).data();
        double mx = kNegInf;
        for (Index k = 0; k < p; ++k) mx = std::max(mx, lk[k] + lu[k]);
        double s = 0.0;
        for (Index k = 0; k < p; ++k) s += std::exp(lk[k] + lu[k] - mx);
        log_v[i][static_cast<Index>(q)] = log_h[i][static_cast<Index>(q)] - (mx + std::log(s));
      }
      for (Index k = 0; k < p; ++k) {
        log_Kv(k, static_cast<Index>(i)) = lse_gather(logK.col(k).data(), S, log_v[i].data());
      }
    });
    log_b.setZero();
    for (std::size_t i = 0; i < N; ++i) log_b += lambdas[i] * log_Kv.col(static_cast<Index>(i));
    for (std::size_t i = 0; i < N; ++i) log_u.col(static_cast<Index>(i)) = log_b - log_Kv.col(static_cast<Index>(i));

    const Eigen::VectorXd b = log_b.array().exp().matrix();
    double dual = -b.sum();
    for (std::size_t i = 0; i < N; ++i) {
      dual += lambdas[i] * log_h[i].array().exp().matrix().dot(log_v[i]);
    }
    res.objective_trace.push_back(-eps * dual);
    res.iterations = it + 1;

    const Eigen::VectorXd bn = b / b.sum();
    if (b_prev.size() == p && (bn - b_prev).lpNorm<1>() < opts.tol) {
      res.converged = true;
      b_prev = bn;
      break;
    }
    b_prev = bn;
  }
  res.barycenter = DiscreteMeasure::normalized(grid, b_prev);
  return res;
}

FreeSupportResult barycenter_free_support(const std::vector<DiscreteMeasure>& measures,
                                          const FreeSupportOptions& opts) {
  if (measures.empty()) throw InvalidArgument("no input measures");
  if (opts.support_size < 1) throw InvalidArgument("support size must be at least 1");
  const Index d = measures.front().dim();
  Index total = 0;
  for (const auto& m : measures) {
    if (m.dim() != d) throw InvalidArgument("dimension mismatch");
    total += m.size();
  }
  if (opts.support_size > total) {
    throw InvalidArgument("support size exceeds the number of input atoms");
  }
  const auto lambdas = resolve_lambdas(opts.lambdas, measures.size());

  Eigen::MatrixXd pooled(d, total);
  Eigen::VectorXd pooled_w(total);
  Index off = 0;
  for (std::size_t i = 0; i < measures.size(); ++i) {
    pooled.middleCols(off, measures[i].size()) = measures[i].locations();
    pooled_w.segment(off, measures[i].size()) = lambdas[i] * measures[i].weights();
    off += measures[i].size();
  }
  if (opts.restarts < 1) throw InvalidArgument("restarts must be at least 1");
  const Eigen::VectorXd b =
      Eigen::VectorXd::Constant(opts.support_size, 1.0 / static_cast<double>(opts.support_size));

  FreeSupportResult best;
  double best_objective = std::numeric_limits<double>::infinity();
  // Pooled k-means starts first, then one start per input quantized to
  // the support size.
  std::vector<std::function<Eigen::MatrixXd()>> starts;
  for (int restart = 0; restart < opts.restarts; ++restart) {
    starts.emplace_back([&, restart] {
      KMeansOptions km;
      km.k = opts.support_size;
      km.seed = opts.seed + static_cast<std::uint64_t>(restart);
      return weighted_kmeans(pooled, pooled_w, km).centroids;
    });
  }
  if (opts.input_starts) {
    for (const auto& m : measures) {
      if (m.size() < opts.support_size) continue;
      starts.emplace_back([&] {
        KMeansOptions km;
        km.k = opts.support_size;
        km.seed = opts.seed;
        return weighted_kmeans(m.locations(), m.weights(), km).centroids;
      });
    }
  }
  for (const auto& start : starts) {
    Eigen::MatrixXd Y = start();
    const Index p = Y.cols();

    FreeSupportResult res;
    std::vector<SinkhornState> states(measures.size());
    std::vector<Eigen::MatrixXd> pushed(measures.size());
    std::vector<double> costs(measures.size());
    double objective = 0.0;
    for (int it = 0; it < opts.max_iter; ++it) {
      detail::parallel_for(measures.size(), [&](std::size_t i) {
        const auto plan = solve_transport(b, measures[i].weights(),
                                          cost_matrix(Y, measures[i].locations()), opts.method,
                                          &states[i]);
        costs[i] = plan.transport_cost;
        pushed[i] = measures[i].locations() * plan.matrix.transpose();
      });
      objective = 0.0;
      Eigen::MatrixXd next = Eigen::MatrixXd::Zero(d, p);
      for (std::size_t i = 0; i < measures.size(); ++i) {
        objective += lambdas[i] * costs[i];
        next += lambdas[i] * pushed[i];
      }
      next = next * b.cwiseInverse().asDiagonal();
      res.objective_trace.push_back(objective);
      res.iterations = it + 1;
      const double moved = (next - Y).colwise().norm().maxCoeff();
      Y = std::move(next);
      if (moved < opts.tol) break;
    }
    res.barycenter = DiscreteMeasure(std::move(Y), b);
    // Strict comparison keeps the earliest start on ties.
    if (objective < best_objective) {
      best_objective = objective;
      best = std::move(res);
    }
  }
  return best;
}

DiscreteMeasure barycenter_multimarginal_exact(const std::vector<DiscreteMeasure>& measures,
                                               const MultiMarginalOptions& opts) {
  if (measures.empty()) throw InvalidArgument("no input measures");
  const std::size_t N = measures.size();
  const Index d = measures.front().dim();
  std::size_t tuples = 1;
  for (const auto& m : measures) {
    if (m.dim() != d) throw InvalidArgument("dimension mismatch");
    tuples *= static_cast<std::size_t>(m.size());
    if (tuples > opts.max_tuples) {
      throw InvalidArgument("multi-marginal problem exceeds the tuple cap");
    }
  }
  const auto lambdas = resolve_lambdas(opts.lambdas, N);

  // One row per atom; the last atom of every measure after the first is
  // implied by total mass and dropped.
  std::vector<Index> row_offset(N);
  Index rows = 0;
  for (std::size_t i = 0; i < N; ++i) {
    row_offset[i] = rows;
    rows += i == 0 ? measures[i].size() : measures[i].size() - 1;
  }
  detail::IncidenceLp lp;
  lp.rows = rows;
  lp.rhs.resize(rows);
  for (std::size_t i = 0; i < N; ++i) {
    const Index count = i == 0 ? measures[i].size() : measures[i].size() - 1;
    lp.rhs.segment(row_offset[i], count) = measures[i].weights().head(count);
  }
  lp.columns.reserve(tuples);
  lp.cost.reserve(tuples);
  Eigen::MatrixXd centers(d, static_cast<Index>(tuples));

  std::vector<Index> idx(N, 0);
  for (std::size_t t = 0; t < tuples; ++t) {
    Eigen::VectorXd center = Eigen::VectorXd::Zero(d);
    for (std::size_t i = 0; i < N; ++i) center += lambdas[i] * measures[i].locations().col(idx[i]);
    double cost = 0.0;
    std::vector<Index> col;
    for (std::size_t i = 0; i < N; ++i) {
      cost += lambdas[i] * (measures[i].locations().col(idx[i]) - center).squaredNorm();
      if (i == 0 || idx[i] < measures[i].size() - 1) col.push_back(row_offset[i] + idx[i]);
    }
    lp.columns.push_back(std::move(col));
    lp.cost.push_back(cost);
    centers.col(static_cast<Index>(t)) = center;
    for (std::size_t i = N; i-- > 0;) {
      if (++idx[i] < measures[i].size()) break;
      idx[i] = 0;
    }
  }

  const auto sol = detail::solve_incidence_lp(lp);
  const Eigen::VectorXd mass = sol.x.unaryExpr([](double x) { return x > 1e-14 ? x : 0.0; });
  const Index count = (mass.array() > 0.0).count();
  Eigen::MatrixXd loc(d, count);
  Eigen::VectorXd w(count);
  Index a = 0;
  for (Index t = 0; t < mass.size(); ++t) {
    if (mass[t] > 0.0) {
      loc.col(a) = centers.col(t);
      w[a] = mass[t];
      ++a;
    }
  }
  return merge_atoms(loc, w, opts.merge_tol);
}

double barycenter_objective(const std::vector<DiscreteMeasure>& measures,
                            const DiscreteMeasure& bar, const std::vector<double>& lambdas) {
  const auto l = resolve_lambdas(lambdas, measures.size());
  double total = 0.0;
  for (std::size_t i = 0; i < measures.size(); ++i) total += l[i] * w2_squared(measures[i], bar);
  return total;
}

}  // namespace wpca
