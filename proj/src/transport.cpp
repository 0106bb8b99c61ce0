#include "wpca/transport.hpp"

#include "network_simplex.hpp"
#include "wpca/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace wpca {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Scalings beyond this leave too little headroom for the kernel products.
constexpr double kMaxScaling = 1e250;

void check_problem(const Eigen::VectorXd& r, const Eigen::VectorXd& c,
                   const CostMatrix& M) {
  if (M.rows() != r.size() || M.cols() != c.size()) {
    throw InvalidArgument("size mismatch between marginals and cost matrix");
  }
  check_simplex(r, 1e-6);
  check_simplex(c, 1e-6);
}

double l1_residual(const Eigen::MatrixXd& P, const Eigen::VectorXd& r,
                   const Eigen::VectorXd& c) {
  return (P.rowwise().sum() - r).lpNorm<1>() + (P.colwise().sum().transpose() - c).lpNorm<1>();
}

double safe_log(double x) { return x > 0.0 ? std::log(x) : kNegInf; }

double log_sum_exp(const double* x, Index n, Index stride) {
  double mx = kNegInf;
  for (Index i = 0; i < n; ++i) mx = std::max(mx, x[i * stride]);
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (Index i = 0; i < n; ++i) s += std::exp(x[i * stride] - mx);
  return mx + std::log(s);
}

struct SinkhornRun {
  Eigen::MatrixXd plan;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  bool underflow = false;
  std::vector<double> history;
};

// Scaling iterations u = r / (K v), v = c / (K^T u) on the Gibbs kernel.
SinkhornRun sinkhorn_plain(const Eigen::VectorXd& r, const Eigen::VectorXd& c,
                           const Eigen::MatrixXd& M, double eps, double omega, int max_iter,
                           double tol, bool record, SinkhornState* state) {
  SinkhornRun run;
  // std::exp rather than the vectorized kernel: the latter flushes large
  // negative arguments to denormals instead of zero.
  const Eigen::MatrixXd K = M.unaryExpr([eps](double m) { return std::exp(-m / eps); });
  Eigen::VectorXd u = Eigen::VectorXd::Ones(r.size());
  if (state != nullptr && state->f.size() == r.size()) {
    u = state->f.unaryExpr([eps](double f) { return std::exp(f / eps); });
    for (Index k = 0; k < r.size(); ++k) {
      if (r[k] == 0.0) u[k] = 0.0;
    }
  }
  Eigen::VectorXd v(c.size());
  Eigen::VectorXd Ktu = K.transpose() * u;
  Eigen::VectorXd Kv(r.size());

  auto divide = [&run](const Eigen::VectorXd& num, const Eigen::VectorXd& den,
                       Eigen::VectorXd& out) {
    for (Index i = 0; i < num.size(); ++i) {
      if (num[i] == 0.0) {
        out[i] = 0.0;
      } else if (!(den[i] > 0.0) || !std::isfinite(den[i])) {
        run.underflow = true;
        out[i] = 0.0;
      } else {
        out[i] = num[i] / den[i];
        if (out[i] > kMaxScaling) run.underflow = true;
      }
    }
  };

  // Relaxed sweeps take weighted geometric steps towards the plain
  // updates. Convergence is tested on the plain row update, which is the one
  // kept on exit.
  const bool relaxed = omega != 1.0;
  Eigen::VectorXd v_plain(c.size());
  Eigen::VectorXd u_plain(r.size());
  auto blend = [omega](Eigen::VectorXd& x, const Eigen::VectorXd& target) {
    for (Index i = 0; i < x.size(); ++i) {
      x[i] = x[i] > 0.0 && target[i] > 0.0 ? std::pow(x[i], 1.0 - omega) * std::pow(target[i], omega)
                                           : target[i];
    }
  };
  v.setOnes();
  for (int it = 0; it < max_iter; ++it) {
    divide(c, Ktu, v_plain);
    if (relaxed && it > 0) {
      blend(v, v_plain);
    } else {
      v = v_plain;
    }
    Kv.noalias() = K * v;
    divide(r, Kv, u_plain);
    if (run.underflow || !u_plain.allFinite() || !v.allFinite()) {
      run.underflow = true;
      return run;
    }
    Ktu.noalias() = K.transpose() * u_plain;
    run.iterations = it + 1;
    run.residual = (v.array() * Ktu.array() - c.array()).abs().sum();
    if (record) run.history.push_back(run.residual);
    if (run.residual < tol || it + 1 == max_iter) {
      u = u_plain;
      run.converged = run.residual < tol;
      break;
    }
    if (relaxed) {
      blend(u, u_plain);
      if (!u.allFinite() || u.maxCoeff() > kMaxScaling) {
        run.underflow = true;
        return run;
      }
      Ktu.noalias() = K.transpose() * u;
    } else {
      u = u_plain;
    }
  }
  run.plan = u.asDiagonal() * K * v.asDiagonal();
  if (!run.plan.allFinite()) {
    run.underflow = true;
    return run;
  }
  if (state != nullptr) {
    state->f = u.unaryExpr([eps](double x) { return eps * safe_log(x); });
    state->g = v.unaryExpr([eps](double x) { return eps * safe_log(x); });
  }
  return run;
}

// Alternating soft-min updates of the dual potentials.
class LogSinkhorn {
 public:
  LogSinkhorn(const Eigen::VectorXd& r, const Eigen::VectorXd& c,
              const Eigen::MatrixXd& M)
      : M_(M), log_r_(r.unaryExpr(&safe_log)), log_c_(c.unaryExpr(&safe_log)),
        c_(c), buf_(M.rows(), M.cols()) {
    f_ = Eigen::VectorXd::Zero(r.size());
    g_ = Eigen::VectorXd::Zero(c.size());
    for (Index k = 0; k < r.size(); ++k) {
      if (r[k] == 0.0) f_[k] = kNegInf;
    }
  }

  void warm_start(const SinkhornState& s) {
    for (Index k = 0; k < f_.size(); ++k) {
      if (std::isfinite(f_[k]) && std::isfinite(s.f[k])) f_[k] = s.f[k];
    }
  }

  // Runs until the column residual drops below tol; returns iterations used.
  int iterate(double eps, int max_iter, double tol, SinkhornRun& run, bool record) {
    const Index p = M_.rows();
    const Index n = M_.cols();
    int it = 0;
    for (; it < max_iter; ++it) {
      // g_j = eps log c_j - eps LSE_k (f_k - M_kj) / eps
      for (Index j = 0; j < n; ++j) {
        if (!std::isfinite(log_c_[j])) {
          g_[j] = kNegInf;
          continue;
        }
        for (Index k = 0; k < p; ++k) buf_(k, j) = (f_[k] - M_(k, j)) / eps;
        g_[j] = eps * (log_c_[j] - log_sum_exp(&buf_(0, j), p, 1));
      }
      for (Index k = 0; k < p; ++k) {
        if (!std::isfinite(log_r_[k])) {
          f_[k] = kNegInf;
          continue;
        }
        for (Index j = 0; j < n; ++j) buf_(k, j) = (g_[j] - M_(k, j)) / eps;
        f_[k] = eps * (log_r_[k] - log_sum_exp(&buf_(k, 0), n, p));
      }
      double res = 0.0;
      for (Index j = 0; j < n; ++j) {
        double s = 0.0;
        if (std::isfinite(g_[j])) {
          for (Index k = 0; k < p; ++k) {
            if (std::isfinite(f_[k])) s += std::exp((f_[k] + g_[j] - M_(k, j)) / eps);
          }
        }
        res += std::abs(s - c_[j]);
      }
      run.residual = res;
      if (record) run.history.push_back(res);
      if (res < tol) {
        ++it;
        run.converged = true;
        break;
      }
    }
    return it;
  }

  Eigen::MatrixXd plan(double eps) const {
    Eigen::MatrixXd P(M_.rows(), M_.cols());
    for (Index j = 0; j < M_.cols(); ++j) {
      for (Index k = 0; k < M_.rows(); ++k) {
        const double x = f_[k] + g_[j];
        P(k, j) = std::isfinite(x) ? std::exp((x - M_(k, j)) / eps) : 0.0;
      }
    }
    return P;
  }

  const Eigen::VectorXd& f() const { return f_; }
  const Eigen::VectorXd& g() const { return g_; }

 private:
  const Eigen::MatrixXd& M_;
  Eigen::VectorXd log_r_;
  Eigen::VectorXd log_c_;
  const Eigen::VectorXd& c_;
  Eigen::VectorXd f_;
  Eigen::VectorXd g_;
  Eigen::MatrixXd buf_;
};

SinkhornRun sinkhorn_log(const Eigen::VectorXd& r, const Eigen::VectorXd& c,
                         const Eigen::MatrixXd& M, const SinkhornOptions& opts,
                         SinkhornState* state) {
  SinkhornRun run;
  LogSinkhorn solver(r, c, M);
  const bool warm = state != nullptr && state->f.size() == r.size();
  if (warm) {
    solver.warm_start(*state);
  } else if (opts.epsilon_scaling) {
    // Coarse stages only need rough potentials for the next stage.
    const double target = opts.epsilon;
    double eps = std::max(target, M.maxCoeff());
    while (eps > target && run.iterations < opts.max_iter) {
      SinkhornRun stage;
      const int budget = std::min(200, opts.max_iter - run.iterations);
      run.iterations += solver.iterate(eps, budget, std::max(opts.tol, 1e-3), stage, false);
      eps = std::max(target, 0.5 * eps);
      if (eps == target) break;
    }
  }
  const int remaining = std::max(0, opts.max_iter - run.iterations);
  run.iterations += solver.iterate(opts.epsilon, remaining, opts.tol, run,
                                   opts.record_residuals);
  run.plan = solver.plan(opts.epsilon);
  if (!run.plan.allFinite()) {
    throw NumericalError("log-domain Sinkhorn produced non-finite values");
  }
  if (state != nullptr) {
    state->f = solver.f();
    state->g = solver.g();
  }
  return run;
}

TransportPlan finish_plan(Eigen::MatrixXd P, const Eigen::VectorXd& r,
                          const Eigen::VectorXd& c, const CostMatrix& M) {
  TransportPlan plan;
  plan.transport_cost = P.cwiseProduct(M.entries()).sum();
  plan.marginal_residual = l1_residual(P, r, c);
  plan.matrix = std::move(P);
  plan.row_marginal = r;
  plan.col_marginal = c;
  return plan;
}

}  // namespace

TransportPlan sinkhorn(const Eigen::VectorXd& row_weights,
                       const Eigen::VectorXd& col_weights, const CostMatrix& M,
                       const SinkhornOptions& opts, SinkhornState* state) {
  if (!(opts.epsilon > 0.0) || !std::isfinite(opts.epsilon)) {
    throw InvalidArgument("Sinkhorn epsilon must be positive");
  }
  if (opts.max_iter < 1) {
    throw InvalidArgument("Sinkhorn max_iter must be positive");
  }
  if (!(opts.relaxation > 0.0 && opts.relaxation < 2.0)) {
    throw InvalidArgument("Sinkhorn relaxation must lie in (0, 2)");
  }
  check_problem(row_weights, col_weights, M);

  bool use_log = opts.domain == SinkhornDomain::log;
  if (opts.domain == SinkhornDomain::automatic) {
    use_log = opts.epsilon < 1e-2 * M.median();
  }

  SinkhornRun run;
  if (!use_log) {
    run = sinkhorn_plain(row_weights, col_weights, M.entries(), opts.epsilon, opts.relaxation,
                         opts.max_iter, opts.tol, opts.record_residuals, state);
    if (run.underflow) {
      if (opts.domain == SinkhornDomain::plain) {
        throw NumericalError(
            "Sinkhorn scaling underflowed; use the log domain or a larger epsilon");
      }
      use_log = true;
    }
  }
  if (use_log) {
    run = sinkhorn_log(row_weights, col_weights, M.entries(), opts, state);
  }

  TransportPlan plan = finish_plan(std::move(run.plan), row_weights, col_weights, M);
  plan.iterations = run.iterations;
  plan.converged = run.converged;
  plan.log_domain = use_log;
  plan.residual_history = std::move(run.history);
  return plan;
}

TransportPlan exact_transport(const Eigen::VectorXd& row_weights,
                              const Eigen::VectorXd& col_weights,
                              const CostMatrix& M, const ExactOptions& opts) {
  check_problem(row_weights, col_weights, M);
  const auto entries = static_cast<std::size_t>(M.rows()) * static_cast<std::size_t>(M.cols());
  if (entries > opts.max_entries) {
    std::ostringstream os;
    os << "exact transport limited to " << opts.max_entries << " plan entries (got "
       << entries << "); use sinkhorn for this problem size";
    throw InvalidArgument(os.str());
  }
  auto result = detail::network_simplex(row_weights, col_weights, M.entries());
  Eigen::MatrixXd P = std::move(result.flow);
  // Round-off from flow updates.
  P = P.unaryExpr([](double x) { return x > 1e-15 ? x : 0.0; });
  TransportPlan plan = finish_plan(std::move(P), row_weights, col_weights, M);
  plan.iterations = static_cast<int>(std::min<long>(result.pivots, std::numeric_limits<int>::max()));
  return plan;
}

TransportPlan solve_transport(const Eigen::VectorXd& row_weights,
                              const Eigen::VectorXd& col_weights,
                              const CostMatrix& M, const TransportMethod& method,
                              SinkhornState* state) {
  if (method.kind == TransportMethod::Kind::exact) {
    return exact_transport(row_weights, col_weights, M);
  }
  return sinkhorn(row_weights, col_weights, M, method.sinkhorn, state);
}

double w2_squared(const DiscreteMeasure& nu, const DiscreteMeasure& eta,
                  const TransportMethod& method) {
  if (nu.dim() != eta.dim()) {
    throw InvalidArgument("dimension mismatch");
  }
  const CostMatrix M = cost_matrix(nu.locations(), eta.locations());
  return solve_transport(nu.weights(), eta.weights(), M, method).transport_cost;
}

BarycentricMap barycentric_projection(const TransportPlan& plan,
                                      const Eigen::MatrixXd& sources,
                                      const Eigen::MatrixXd& targets) {
  const Index p = plan.matrix.rows();
  const Index n = plan.matrix.cols();
  if (targets.cols() != n || sources.cols() != p || plan.row_marginal.size() != p) {
    throw InvalidArgument("size mismatch between plan and locations");
  }
  if (sources.rows() != targets.rows()) {
    throw InvalidArgument("dimension mismatch");
  }
  BarycentricMap map;
  map.source_weights = plan.row_marginal;
  map.images.resize(targets.rows(), p);
  map.identity_fallback.assign(static_cast<std::size_t>(p), false);
  const Eigen::MatrixXd XPt = targets * plan.matrix.transpose();
  for (Index k = 0; k < p; ++k) {
    const double b = plan.row_marginal[k];
    if (b > 0.0) {
      map.images.col(k) = XPt.col(k) / b;
      continue;
    }
    if (plan.matrix.row(k).cwiseAbs().maxCoeff() > 0.0) {
      throw InvalidArgument("plan moves mass out of a zero-weight atom");
    }
    map.images.col(k) = sources.col(k);
    map.identity_fallback[static_cast<std::size_t>(k)] = true;
  }
  return map;
}

void write_plan_csv(const TransportPlan& plan, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw InvalidArgument("cannot write " + path);
  }
  out.precision(17);
  out << "row,col,mass\n";
  for (Index k = 0; k < plan.matrix.rows(); ++k) {
    for (Index j = 0; j < plan.matrix.cols(); ++j) {
      if (plan.matrix(k, j) > 0.0) {
        out << k << ',' << j << ',' << plan.matrix(k, j) << '\n';
      }
    }
  }
}

}  // namespace wpca
