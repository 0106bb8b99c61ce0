#include "wpca/wpg.hpp"

#include "parallel.hpp"
#include "wpca/error.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace wpca {

void SolverConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda must be >= 0");
  if (beta && (!(*beta > 0.0) || !std::isfinite(*beta))) {
    throw InvalidArgument("beta must be positive");
  }
  if (grid_k < 2) throw InvalidArgument("grid_k must be at least 2");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw InvalidArgument("epsilon must be >= 0");
  if (n_components < 1) throw InvalidArgument("n_components must be at least 1");
  if (max_outer_iter < 1) throw InvalidArgument("max_outer_iter must be at least 1");
  if (!(obj_tol >= 0.0)) throw InvalidArgument("obj_tol must be >= 0");
  if (transport_solver == TransportMethod::Kind::sinkhorn && !(epsilon > 0.0)) {
    throw InvalidArgument("epsilon must be positive for the Sinkhorn t search");
  }
  if (projection_solver == ProjectionSolver::sinkhorn && !(epsilon > 0.0)) {
    throw InvalidArgument("epsilon must be positive for Sinkhorn projections");
  }
  if (max_halvings < 0 || projection_rounds < 1) throw InvalidArgument("bad line-search settings");
  if (!(sinkhorn_relaxation > 0.0 && sinkhorn_relaxation < 2.0)) {
    throw InvalidArgument("sinkhorn_relaxation must lie in (0, 2)");
  }
}

namespace {

TransportMethod entropic_method(const SolverConfig& cfg, double eps) {
  auto m = TransportMethod::entropic(eps);
  m.sinkhorn.tol = cfg.sinkhorn_tol;
  m.sinkhorn.max_iter = cfg.sinkhorn_max_iter;
  m.sinkhorn.relaxation = cfg.sinkhorn_relaxation;
  return m;
}

TransportMethod grid_method(const SolverConfig& cfg) {
  if (cfg.transport_solver == TransportMethod::Kind::exact) return TransportMethod::exact();
  return entropic_method(cfg, cfg.epsilon);
}

bool entropic_projection(const SolverConfig& cfg, Index p) {
  switch (cfg.projection_solver) {
    case ProjectionSolver::exact: return false;
    case ProjectionSolver::sinkhorn: return true;
    case ProjectionSolver::automatic: return p > cfg.exact_projection_limit;
  }
  return false;
}

// b^T z + a^T x - 2 <P, Z^T X>
double decomposed_cost(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& P,
                       const DiscreteMeasure& mu, const Eigen::VectorXd& b) {
  const auto& X = mu.locations();
  return b.dot(Z.colwise().squaredNorm().transpose()) +
         mu.weights().dot(X.colwise().squaredNorm().transpose()) -
         2.0 * (Z.transpose() * X).cwiseProduct(P).sum();
}

void check_plan(const TransportPlan& plan, const DiscreteMeasure& mu, const DiscreteMeasure& base) {
  if (plan.matrix.rows() != base.size() || plan.matrix.cols() != mu.size() ||
      plan.row_marginal.size() != base.size() || plan.col_marginal.size() != mu.size()) {
    throw InvalidArgument("transport plan does not match the base and input sizes");
  }
  if ((plan.row_marginal - base.weights()).cwiseAbs().maxCoeff() > 1e-9 ||
      (plan.col_marginal - mu.weights()).cwiseAbs().maxCoeff() > 1e-9) {
    throw InvalidArgument("transport plan marginals do not match the measures");
  }
}

Eigen::MatrixXd residual_field(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                               const TransportPlan& plan, double t, const DiscreteMeasure& mu,
                               const DiscreteMeasure& base) {
  const auto& b = base.weights();
  if (b.minCoeff() <= 0.0) throw InvalidArgument("base measure has zero-weight atoms");
  const Eigen::MatrixXd Z = base.locations() - A + t * (A + B);
  return Z - mu.locations() * plan.matrix.transpose() * b.cwiseInverse().asDiagonal();
}

Eigen::MatrixXd replicate_mean(const Eigen::MatrixXd& G, const Eigen::VectorXd& b) {
  const Eigen::VectorXd m = G * b;
  return m.replicate(1, G.cols());
}

struct Evaluation {
  double objective = 0.0;
  std::vector<GridSearchResult> fits;
};

class ComponentSolver {
 public:
  ComponentSolver(const std::vector<DiscreteMeasure>& measures, const DiscreteMeasure& base,
                  const SolverConfig& cfg, const std::vector<Eigen::MatrixXd>& priors,
                  const FitHooks& hooks, int component)
      : measures_(measures), base_(base), cfg_(cfg), priors_(priors), hooks_(hooks),
        component_(component), states_(measures.size()) {
    const auto n = static_cast<double>(measures.size());
    beta0_ = cfg.beta.value_or(1.0 / (2.0 * n));
    entropic_projection_ = entropic_projection(cfg, base.size());
    if (entropic_projection_ && !(cfg.epsilon > 0.0)) {
      throw InvalidArgument("epsilon must be positive for Sinkhorn projections");
    }
  }

  PrincipalComponent run(Eigen::MatrixXd V1, Eigen::MatrixXd V2) {
    PrincipalComponent comp;
    project(V1, V2, 0, 0);
    Evaluation E = evaluate(V1, V2);
    comp.objective_trace.push_back(E.objective);
    spdlog::debug("component {}: initial objective {:.9g}", component_ + 1, E.objective);

    double step = beta0_;
    int small_changes = 0;
    int rejections = 0;
    int anneal = 0;
    for (int it = 1; it <= cfg_.max_outer_iter; ++it) {
      comp.iterations = it;
      if (entropic_projection_) {
        anneal = std::clamp(std::max(anneal, it - (cfg_.max_outer_iter - 3)), 0, 3);
      }
      auto [G1, G2] = gradient(V1, V2, E);

      StepRecord rec;
      rec.surrogate_start = surrogate(V1, V2, E);
      double s = step;
      Eigen::MatrixXd A = V1 - s * G1;
      Eigen::MatrixXd B = V2 - s * G2;
      rec.surrogate_gradient = surrogate(A, B, E);
      while (rec.surrogate_gradient > rec.surrogate_start && rec.halvings < cfg_.max_halvings) {
        s *= 0.5;
        ++rec.halvings;
        A = V1 - s * G1;
        B = V2 - s * G2;
        rec.surrogate_gradient = surrogate(A, B, E);
      }
      rec.step = s;
      if (rec.surrogate_gradient > rec.surrogate_start) {
        comp.steps.push_back(rec);
        comp.converged = true;
        spdlog::debug("component {}: no descent step at iteration {}", component_ + 1, it);
        break;
      }

      project(A, B, it, anneal);
      rec.surrogate_projected = surrogate(A, B, E);
      Evaluation candidate = evaluate(A, B);
      rec.objective = candidate.objective;
      rec.accepted = candidate.objective <= E.objective;
      comp.steps.push_back(rec);
      spdlog::debug("component {} iteration {}: step {:.3g} surrogate {:.9g} -> {:.9g} -> {:.9g}, "
                    "objective {:.9g} ({})",
                    component_ + 1, it, s, rec.surrogate_start, rec.surrogate_gradient,
                    rec.surrogate_projected, rec.objective, rec.accepted ? "accepted" : "rejected");

      if (!rec.accepted) {
        step = 0.5 * s;
        if (++rejections > cfg_.max_halvings) {
          comp.converged = true;
          break;
        }
        continue;
      }
      rejections = 0;
      const double previous = E.objective;
      V1 = std::move(A);
      V2 = std::move(B);
      E = std::move(candidate);
      comp.objective_trace.push_back(E.objective);
      step = std::min(beta0_, 2.0 * s);

      const double rel = previous > 0.0 ? (previous - E.objective) / previous : 0.0;
      small_changes = rel < cfg_.obj_tol ? small_changes + 1 : 0;
      if (small_changes >= 2) {
        if (entropic_projection_ && anneal < 3) {
          ++anneal;
          small_changes = 0;
          continue;
        }
        comp.converged = true;
        break;
      }
    }
    spdlog::info("component {}: objective {:.9g} -> {:.9g} after {} iterations",
                 component_ + 1, comp.objective_trace.front(), comp.objective_trace.back(),
                 comp.iterations);
    comp.v1 = VelocityField(std::move(V1));
    comp.v2 = VelocityField(std::move(V2));
    for (const auto& f : E.fits) comp.projection_times.push_back(f.t);
    return comp;
  }

 private:
  Evaluation evaluate(const Eigen::MatrixXd& V1, const Eigen::MatrixXd& V2) {
    const GeneralizedGeodesic g(base_, VelocityField(V1), VelocityField(V2));
    Evaluation E;
    E.fits.resize(measures_.size());
    detail::parallel_for(measures_.size(), [&](std::size_t i) {
      E.fits[i] = distance_to_geodesic(g, measures_[i], cfg_, &states_[i]);
    });
    for (const auto& f : E.fits) E.objective += f.value;
    E.objective += cfg_.lambda * omega(V1, V2, base_.weights());
    return E;
  }

  double surrogate(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Evaluation& E) const {
    double total = 0.0;
    for (std::size_t i = 0; i < measures_.size(); ++i) {
      total += majorization_value(A, B, E.fits[i].plan, E.fits[i].t, measures_[i], base_);
    }
    return total + cfg_.lambda * omega(A, B, base_.weights());
  }

  std::pair<Eigen::MatrixXd, Eigen::MatrixXd> gradient(const Eigen::MatrixXd& V1,
                                                       const Eigen::MatrixXd& V2,
                                                       const Evaluation& E) const {
    const auto& b = base_.weights();
    Eigen::MatrixXd G1 = Eigen::MatrixXd::Zero(V1.rows(), V1.cols());
    Eigen::MatrixXd G2 = G1;
    for (std::size_t i = 0; i < measures_.size(); ++i) {
      auto [g1, g2] = mm_gradients(V1, V2, E.fits[i].plan, E.fits[i].t, measures_[i], base_);
      G1 += g1;
      G2 += g2;
    }
    // Entrywise derivatives of the penalty, converted to the L2(b) metric.
    auto [o1, o2] = grad_omega(V1, V2, b);
    G1 += cfg_.lambda * o1 * b.cwiseInverse().asDiagonal();
    G2 += cfg_.lambda * o2 * b.cwiseInverse().asDiagonal();
    if (cfg_.fields == FieldFamily::translation) {
      G1 = replicate_mean(G1, b);
      G2 = replicate_mean(G2, b);
    }
    return {std::move(G1), std::move(G2)};
  }

  double worst_residual(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) const {
    const auto& b = base_.weights();
    return std::max(orthogonality_residual(A, priors_, b), orthogonality_residual(B, priors_, b));
  }

  void project(Eigen::MatrixXd& A, Eigen::MatrixXd& B, int iteration, int anneal) const {
    const auto& b = base_.weights();
    const TransportMethod method =
        entropic_projection_ ? entropic_method(cfg_, cfg_.epsilon * std::ldexp(1.0, -anneal))
                             : TransportMethod::exact();
    for (int round = 0; round < cfg_.projection_rounds; ++round) {
      A = orthogonality_projection(A, priors_, b);
      B = orthogonality_projection(B, priors_, b);
      if (cfg_.fields == FieldFamily::translation) return;
      const auto g = optimal_map_projection(
          GeneralizedGeodesic(base_, VelocityField(A), VelocityField(B)), method);
      if (hooks_.after_map_projection) hooks_.after_map_projection(component_, iteration, g);
      A = g.v1().vectors();
      B = g.v2().vectors();
      if (worst_residual(A, B) <= cfg_.orthogonality_tol) return;
    }
    A = orthogonality_projection(A, priors_, b);
    B = orthogonality_projection(B, priors_, b);
  }

  const std::vector<DiscreteMeasure>& measures_;
  const DiscreteMeasure& base_;
  const SolverConfig& cfg_;
  const std::vector<Eigen::MatrixXd>& priors_;
  const FitHooks& hooks_;
  int component_;
  std::vector<std::vector<SinkhornState>> states_;
  double beta0_ = 1.0;
  bool entropic_projection_ = false;
};

}  // namespace

GridSearchResult distance_to_geodesic(const GeneralizedGeodesic& g, const DiscreteMeasure& mu,
                                      const SolverConfig& cfg,
                                      std::vector<SinkhornState>* states) {
  const auto& base = g.base();
  if (mu.dim() != base.dim()) throw InvalidArgument("dimension mismatch");
  if (cfg.grid_k < 2) throw InvalidArgument("grid_k must be at least 2");
  const auto method = grid_method(cfg);
  const auto K = static_cast<std::size_t>(cfg.grid_k);
  if (states != nullptr && states->size() != K) states->assign(K, SinkhornState{});

  GridSearchResult best;
  best.value = std::numeric_limits<double>::infinity();
  best.grid_values.reserve(K);
  for (std::size_t k = 0; k < K; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(K - 1);
    const Eigen::MatrixXd Z = g.locations_at(t);
    auto plan = solve_transport(base.weights(), mu.weights(), cost_matrix(Z, mu.locations()),
                                method, states != nullptr ? &(*states)[k] : nullptr);
    const double value = decomposed_cost(Z, plan.matrix, mu, base.weights());
    best.grid_values.push_back(value);
    if (value < best.value) {
      best.value = value;
      best.t = t;
      best.plan = std::move(plan);
    }
  }
  if (!std::isfinite(best.value)) throw NumericalError("non-finite distance to the geodesic");
  return best;
}

double majorization_value(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                          const TransportPlan& plan, double t, const DiscreteMeasure& mu,
                          const DiscreteMeasure& base) {
  check_plan(plan, mu, base);
  const Eigen::MatrixXd Z = base.locations() - A + t * (A + B);
  return decomposed_cost(Z, plan.matrix, mu, base.weights());
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> mm_gradients(const Eigen::MatrixXd& A,
                                                         const Eigen::MatrixXd& B,
                                                         const TransportPlan& plan, double t,
                                                         const DiscreteMeasure& mu,
                                                         const DiscreteMeasure& base) {
  check_plan(plan, mu, base);
  const Eigen::MatrixXd R = residual_field(A, B, plan, t, mu, base);
  return {2.0 * (t - 1.0) * R, 2.0 * t * R};
}

Eigen::MatrixXd orthogonality_projection(const Eigen::MatrixXd& v,
                                         const std::vector<Eigen::MatrixXd>& priors,
                                         const Eigen::VectorXd& b) {
  std::vector<Eigen::MatrixXd> basis;
  for (std::size_t i = 0; i < priors.size(); ++i) {
    const auto& w = priors[i];
    if (w.rows() != v.rows() || w.cols() != v.cols()) {
      throw InvalidArgument("prior field does not match the field shape");
    }
    Eigen::MatrixXd q = w;
    for (const auto& e : basis) q -= weighted_inner(q, e, b) * e;
    const double nq = weighted_norm(q, b);
    if (!(nq > 1e-10 * weighted_norm(w, b))) {
      spdlog::warn("prior direction {} is linearly dependent on earlier ones; ignored", i + 1);
      continue;
    }
    basis.push_back(q / nq);
  }
  Eigen::MatrixXd out = v;
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& e : basis) out -= weighted_inner(out, e, b) * e;
  }
  return out;
}

double orthogonality_residual(const Eigen::MatrixXd& v,
                              const std::vector<Eigen::MatrixXd>& priors,
                              const Eigen::VectorXd& b) {
  const double nv = weighted_norm(v, b);
  double worst = 0.0;
  for (const auto& w : priors) {
    const double nw = weighted_norm(w, b);
    if (nv > 0.0 && nw > 0.0) worst = std::max(worst, std::abs(weighted_inner(v, w, b)) / (nv * nw));
  }
  return worst;
}

GeneralizedGeodesic optimal_map_projection(const GeneralizedGeodesic& g,
                                           const TransportMethod& method) {
  const auto& base = g.base();
  const auto& Y = base.locations();
  const auto& b = base.weights();
  // Pushes the base through id + V and returns the barycentric map minus id.
  auto optimal_displacement = [&](const Eigen::MatrixXd& V) -> Eigen::MatrixXd {
    if (V.isZero(0.0)) return V;
    const Eigen::MatrixXd T = Y + V;
    const auto plan = solve_transport(b, b, cost_matrix(Y, T), method);
    return barycentric_projection(plan, Y, T).images - Y;
  };
  return {base, VelocityField(-optimal_displacement(-g.v1().vectors())),
          VelocityField(optimal_displacement(g.v2().vectors()))};
}

GeneralizedGeodesic optimal_map_projection(const GeneralizedGeodesic& g,
                                           const SolverConfig& cfg) {
  if (entropic_projection(cfg, g.base().size())) {
    if (!(cfg.epsilon > 0.0)) throw InvalidArgument("epsilon must be positive for Sinkhorn projections");
    return optimal_map_projection(g, entropic_method(cfg, cfg.epsilon));
  }
  return optimal_map_projection(g, TransportMethod::exact());
}

EuclideanPca euclidean_pca_means(const std::vector<DiscreteMeasure>& measures) {
  if (measures.size() < 2) throw InvalidArgument("at least two measures are required");
  const Index d = measures.front().dim();
  const auto N = static_cast<Index>(measures.size());
  Eigen::MatrixXd means(d, N);
  for (Index i = 0; i < N; ++i) {
    if (measures[static_cast<std::size_t>(i)].dim() != d) throw InvalidArgument("dimension mismatch");
    means.col(i) = mean_point(measures[static_cast<std::size_t>(i)]);
  }
  const Eigen::MatrixXd centered = means.colwise() - means.rowwise().mean();
  const Eigen::MatrixXd cov = centered * centered.transpose() / static_cast<double>(N);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::VectorXd vals = eig.eigenvalues().reverse();
  const Eigen::MatrixXd vecs = eig.eigenvectors().rowwise().reverse();
  const double top = vals.size() > 0 ? vals[0] : 0.0;
  Index r = 0;
  while (r < vals.size() && top > 0.0 && vals[r] > 1e-12 * top) ++r;
  return {vecs.leftCols(r), vals.head(r)};
}

PrincipalComponentSet fit(const std::vector<DiscreteMeasure>& measures,
                          const DiscreteMeasure& base, const SolverConfig& cfg,
                          const FitHooks& hooks) {
  cfg.validate();
  if (measures.empty()) throw InvalidArgument("no input measures");
  if (base.empty()) throw InvalidArgument("empty base measure");
  for (const auto& m : measures) {
    if (m.dim() != base.dim()) throw InvalidArgument("dimension mismatch");
  }

  PrincipalComponentSet out;
  out.base = base.without_null_atoms();
  const auto& Y = out.base.locations();
  const auto& b = out.base.weights();
  const Index d = Y.rows();
  const Index p = Y.cols();
  if (p < base.size()) {
    spdlog::info("dropped {} zero-weight base atoms", base.size() - p);
  }

  EuclideanPca pca;
  if (measures.size() >= 2) pca = euclidean_pca_means(measures);
  const Eigen::VectorXd center = Y * b;
  const double spread = std::sqrt(b.dot((Y.colwise() - center).colwise().squaredNorm().transpose()));

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal;
  std::vector<Eigen::MatrixXd> priors;
  for (int c = 0; c < cfg.n_components; ++c) {
    Eigen::MatrixXd V;
    if (c < pca.directions.cols()) {
      // One standard deviation of the means along the c-th direction.
      const Eigen::VectorXd shift = std::sqrt(pca.variances[c]) * pca.directions.col(c);
      V = shift.replicate(1, p);
    } else {
      spdlog::info("component {}: no Euclidean direction left, random initialization", c + 1);
      if (cfg.fields == FieldFamily::translation) {
        Eigen::VectorXd shift(d);
        for (Index k = 0; k < d; ++k) shift[k] = normal(rng);
        V = shift.replicate(1, p);
      } else {
        V.resize(d, p);
        for (Index j = 0; j < p; ++j) {
          for (Index k = 0; k < d; ++k) V(k, j) = normal(rng);
        }
      }
      const double nv = weighted_norm(V, b);
      V *= nv > 0.0 ? 1e-2 * spread / nv : 0.0;
    }
    ComponentSolver solver(measures, out.base, cfg, priors, hooks, c);
    out.components.push_back(solver.run(V, V));
    const auto& comp = out.components.back();
    priors.push_back(comp.v1.vectors() + comp.v2.vectors());
  }
  return out;
}

}  // namespace wpca
