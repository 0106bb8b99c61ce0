#include "network_simplex.hpp"

#include "wpca/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace wpca::detail {

namespace {

constexpr std::int8_t kTree = 0;
constexpr std::int8_t kLower = 1;

class Solver {
 public:
  Solver(const Eigen::VectorXd& supply, const Eigen::VectorXd& demand,
         const Eigen::MatrixXd& cost)
      : p_(supply.size()),
        n_(demand.size()),
        nodes_(p_ + n_),
        root_(nodes_),
        real_arcs_(p_ * n_),
        cost_(cost.data()) {
    const long all_arcs = real_arcs_ + nodes_;
    flow_.assign(static_cast<std::size_t>(all_arcs), 0.0);
    state_.assign(static_cast<std::size_t>(all_arcs), kLower);
    art_src_.resize(static_cast<std::size_t>(nodes_));
    art_tgt_.resize(static_cast<std::size_t>(nodes_));
    art_cost_.resize(static_cast<std::size_t>(nodes_));

    double max_cost = 0.0;
    for (long e = 0; e < real_arcs_; ++e) max_cost = std::max(max_cost, cost_[e]);
    const double art = (max_cost + 1.0) * static_cast<double>(nodes_ + 1);
    eps_ = 1e-12 * art;

    parent_.assign(static_cast<std::size_t>(nodes_ + 1), -1);
    pred_.assign(static_cast<std::size_t>(nodes_ + 1), -1);
    forward_.assign(static_cast<std::size_t>(nodes_ + 1), 0);
    depth_.assign(static_cast<std::size_t>(nodes_ + 1), 0);
    pi_.assign(static_cast<std::size_t>(nodes_ + 1), 0.0);
    adj_.assign(static_cast<std::size_t>(nodes_ + 1), {});

    // Initial strongly feasible tree: every node hangs off an artificial
    // root. Supply nodes ship to the root at zero cost, demand nodes are
    // served from it at a prohibitive cost.
    for (long u = 0; u < nodes_; ++u) {
      const double s = u < p_ ? supply[u] : -demand[u - p_];
      const long e = real_arcs_ + u;
      const auto ui = static_cast<std::size_t>(u);
      state_[static_cast<std::size_t>(e)] = kTree;
      if (s >= 0.0) {
        art_src_[ui] = u;
        art_tgt_[ui] = root_;
        art_cost_[ui] = 0.0;
        flow_[static_cast<std::size_t>(e)] = s;
      } else {
        art_src_[ui] = root_;
        art_tgt_[ui] = u;
        art_cost_[ui] = art;
        flow_[static_cast<std::size_t>(e)] = -s;
      }
      adj_[ui].push_back(e);
      adj_[static_cast<std::size_t>(root_)].push_back(e);
    }
    rebuild_tree();

    block_ = std::max<long>(10, static_cast<long>(std::sqrt(static_cast<double>(real_arcs_))));
  }

  long run() {
    const long max_pivots = 50 * (real_arcs_ + nodes_) + 1000;
    long pivots = 0;
    while (find_entering()) {
      if (++pivots > max_pivots) {
        throw NumericalError("network simplex exceeded its pivot budget");
      }
      pivot();
    }
    return pivots;
  }

  Eigen::MatrixXd plan() const {
    Eigen::MatrixXd P(p_, n_);
    for (long e = 0; e < real_arcs_; ++e) {
      P.data()[e] = flow_[static_cast<std::size_t>(e)];
    }
    return P;
  }

 private:
  long source(long e) const {
    return e < real_arcs_ ? e % p_ : art_src_[static_cast<std::size_t>(e - real_arcs_)];
  }
  long target(long e) const {
    return e < real_arcs_ ? p_ + e / p_ : art_tgt_[static_cast<std::size_t>(e - real_arcs_)];
  }
  double cost(long e) const {
    return e < real_arcs_ ? cost_[e] : art_cost_[static_cast<std::size_t>(e - real_arcs_)];
  }

  double reduced(long e) const {
    return cost(e) + pi_[static_cast<std::size_t>(source(e))] -
           pi_[static_cast<std::size_t>(target(e))];
  }

  // Block search over the real arcs; artificial arcs never re-enter.
  bool find_entering() {
    double best = -eps_;
    long count = block_;
    long e = next_arc_;
    for (long scanned = 0; scanned < real_arcs_; ++scanned) {
      if (state_[static_cast<std::size_t>(e)] == kLower) {
        const double c = reduced(e);
        if (c < best) {
          best = c;
          in_arc_ = e;
        }
      }
      if (++e == real_arcs_) e = 0;
      if (--count == 0) {
        if (best < -eps_) {
          next_arc_ = e;
          return true;
        }
        count = block_;
      }
    }
    if (best < -eps_) {
      next_arc_ = e;
      return true;
    }
    return false;
  }

  void pivot() {
    const long src = source(in_arc_);
    const long tgt = target(in_arc_);

    long u = src;
    long v = tgt;
    while (u != v) {
      if (depth_[static_cast<std::size_t>(u)] >= depth_[static_cast<std::size_t>(v)]) {
        u = parent_[static_cast<std::size_t>(u)];
      } else {
        v = parent_[static_cast<std::size_t>(v)];
      }
    }
    const long join = u;

    // Leaving arc: strict comparison on the source side and non-strict on
    // the target side keeps the tree strongly feasible.
    constexpr double inf = std::numeric_limits<double>::infinity();
    double delta = inf;
    long u_out = -1;
    for (long w = src; w != join; w = parent_[static_cast<std::size_t>(w)]) {
      const auto wi = static_cast<std::size_t>(w);
      const double d = forward_[wi] ? flow_[static_cast<std::size_t>(pred_[wi])] : inf;
      if (d < delta) {
        delta = d;
        u_out = w;
      }
    }
    for (long w = tgt; w != join; w = parent_[static_cast<std::size_t>(w)]) {
      const auto wi = static_cast<std::size_t>(w);
      const double d = forward_[wi] ? inf : flow_[static_cast<std::size_t>(pred_[wi])];
      if (d <= delta) {
        delta = d;
        u_out = w;
      }
    }
    if (u_out < 0) {
      throw NumericalError("network simplex: unbounded cycle");
    }

    if (delta > 0.0) {
      flow_[static_cast<std::size_t>(in_arc_)] += delta;
      for (long w = src; w != join; w = parent_[static_cast<std::size_t>(w)]) {
        const auto wi = static_cast<std::size_t>(w);
        flow_[static_cast<std::size_t>(pred_[wi])] += forward_[wi] ? -delta : delta;
      }
      for (long w = tgt; w != join; w = parent_[static_cast<std::size_t>(w)]) {
        const auto wi = static_cast<std::size_t>(w);
        flow_[static_cast<std::size_t>(pred_[wi])] += forward_[wi] ? delta : -delta;
      }
    }

    const long out_arc = pred_[static_cast<std::size_t>(u_out)];
    flow_[static_cast<std::size_t>(out_arc)] = 0.0;
    state_[static_cast<std::size_t>(out_arc)] = kLower;
    state_[static_cast<std::size_t>(in_arc_)] = kTree;
    detach(out_arc);
    adj_[static_cast<std::size_t>(src)].push_back(in_arc_);
    adj_[static_cast<std::size_t>(tgt)].push_back(in_arc_);
    rebuild_tree();
  }

  void detach(long e) {
    for (long node : {source(e), target(e)}) {
      auto& list = adj_[static_cast<std::size_t>(node)];
      list.erase(std::find(list.begin(), list.end(), e));
    }
  }

  // Re-roots the spanning tree at the artificial root and recomputes
  // parents, depths and node potentials.
  void rebuild_tree() {
    stack_.clear();
    stack_.push_back(root_);
    parent_[static_cast<std::size_t>(root_)] = -1;
    pred_[static_cast<std::size_t>(root_)] = -1;
    depth_[static_cast<std::size_t>(root_)] = 0;
    pi_[static_cast<std::size_t>(root_)] = 0.0;
    while (!stack_.empty()) {
      const long u = stack_.back();
      stack_.pop_back();
      const auto ui = static_cast<std::size_t>(u);
      for (long e : adj_[ui]) {
        if (e == pred_[ui]) continue;
        const long s = source(e);
        const long child = s == u ? target(e) : s;
        const auto ci = static_cast<std::size_t>(child);
        parent_[ci] = u;
        pred_[ci] = e;
        depth_[ci] = depth_[ui] + 1;
        forward_[ci] = s == child;
        // Tree arcs have zero reduced cost.
        pi_[ci] = forward_[ci] ? pi_[ui] - cost(e) : pi_[ui] + cost(e);
        stack_.push_back(child);
      }
    }
  }

  long p_;
  long n_;
  long nodes_;
  long root_;
  long real_arcs_;
  const double* cost_;
  double eps_ = 0.0;
  long block_ = 10;
  long next_arc_ = 0;
  long in_arc_ = -1;

  std::vector<double> flow_;
  std::vector<std::int8_t> state_;
  std::vector<long> art_src_;
  std::vector<long> art_tgt_;
  std::vector<double> art_cost_;

  std::vector<long> parent_;
  std::vector<long> pred_;
  std::vector<char> forward_;
  std::vector<long> depth_;
  std::vector<double> pi_;
  std::vector<std::vector<long>> adj_;
  std::vector<long> stack_;
};

}  // namespace

NetworkSimplexResult network_simplex(const Eigen::VectorXd& supply,
                                     const Eigen::VectorXd& demand,
                                     const Eigen::MatrixXd& cost) {
  Solver solver(supply, demand, cost);
  NetworkSimplexResult out;
  out.pivots = solver.run();
  out.flow = solver.plan();
  return out;
}

}  // namespace wpca::detail
