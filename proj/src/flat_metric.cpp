#include "mvt/flat_metric.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mvt/errors.hpp"

namespace mvt {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kReducedCostTol = 1e-11;
constexpr double kPivotTol = 1e-11;
constexpr double kFeasibilityTol = 1e-9;
constexpr int kRefactorInterval = 64;
constexpr int kDegenerateStreakForBland = 30;

// Dual of the flat-norm LP in equality form:
//   min  sum a_i + sum b_i + sum d_ij y_ij
//   s.t. a_i - b_i + sum_j y_ij - sum_j y_ji = w_i,   a, b, y >= 0.
// Column k < n is a_i = e_i, n <= k < 2n is b_i = -e_i, the rest are arcs
// y_ij = e_i - e_j. The simplex multipliers of an optimal basis are the
// optimal test-function values f_i.
class TransportSimplex {
 public:
  TransportSimplex(std::vector<double> w, std::vector<double> dist)
      : n_(w.size()), w_(std::move(w)), dist_(std::move(dist)) {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j)
        if (i != j && dist_[i * n_ + j] < 2.0) arcs_.push_back({i, j});
  }

  FlatNormResult solve() {
    init_basis();
    FlatNormResult res;
    const std::size_t max_pivots = 50 * (2 * n_ + arcs_.size()) + 1000;
    int degenerate_streak = 0;
    int since_refactor = 0;
    std::vector<double> pi(n_);
    std::vector<double> u(n_);
    while (true) {
      compute_multipliers(pi);
      const bool bland = degenerate_streak >= kDegenerateStreakForBland;
      const std::size_t q = choose_entering(pi, bland);
      if (q == kNone) break;
      entering_direction(q, u);
      const std::size_t r = ratio_test(u);
      if (r == kNone) {
        res.status = LpStatus::infeasible_numerics;  // unbounded dual: cannot happen in exact arithmetic
        return finish(res, pi);
      }
      const double theta = x_[r] / u[r];
      degenerate_streak = theta <= 1e-14 ? degenerate_streak + 1 : 0;
      pivot(q, r, u, theta);
      ++res.pivots;
      if (++since_refactor >= kRefactorInterval) {
        refactor();
        since_refactor = 0;
      }
      if (res.pivots > max_pivots) {
        res.status = LpStatus::infeasible_numerics;
        return finish(res, pi);
      }
    }
    return finish(res, pi);
  }

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  struct Arc {
    std::size_t from;
    std::size_t to;
  };

  double cost(std::size_t col) const {
    if (col < 2 * n_) return 1.0;
    const Arc& a = arcs_[col - 2 * n_];
    return dist_[a.from * n_ + a.to];
  }

  void init_basis() {
    basis_.assign(n_, 0);
    x_.assign(n_, 0.0);
    binv_ = RowMatrix::Zero(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
    for (std::size_t i = 0; i < n_; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      if (w_[i] >= 0.0) {
        basis_[i] = i;
        binv_(ii, ii) = 1.0;
        x_[i] = w_[i];
      } else {
        basis_[i] = n_ + i;
        binv_(ii, ii) = -1.0;
        x_[i] = -w_[i];
      }
    }
  }

  void compute_multipliers(std::vector<double>& pi) const {
    std::fill(pi.begin(), pi.end(), 0.0);
    for (std::size_t r = 0; r < n_; ++r) {
      const double c = cost(basis_[r]);
      const double* row = binv_.data() + r * n_;
      for (std::size_t j = 0; j < n_; ++j) pi[j] += c * row[j];
    }
  }

  double reduced_cost(std::size_t col, const std::vector<double>& pi) const {
    if (col < n_) return 1.0 - pi[col];
    if (col < 2 * n_) return 1.0 + pi[col - n_];
    const Arc& a = arcs_[col - 2 * n_];
    return dist_[a.from * n_ + a.to] - pi[a.from] + pi[a.to];
  }

  // Dantzig pricing (lowest index on ties); Bland's rule while degenerate.
  std::size_t choose_entering(const std::vector<double>& pi, bool bland) const {
    const std::size_t ncols = 2 * n_ + arcs_.size();
    std::size_t best = kNone;
    double best_rc = -kReducedCostTol;
    for (std::size_t col = 0; col < ncols; ++col) {
      const double rc = reduced_cost(col, pi);
      if (rc < best_rc) {
        if (bland) return col;
        best = col;
        best_rc = rc;
      }
    }
    return best;
  }

  void entering_direction(std::size_t q, std::vector<double>& u) const {
    const auto col = [&](std::size_t i, std::size_t r) { return binv_.data()[r * n_ + i]; };
    for (std::size_t r = 0; r < n_; ++r) {
      if (q < n_) {
        u[r] = col(q, r);
      } else if (q < 2 * n_) {
        u[r] = -col(q - n_, r);
      } else {
        const Arc& a = arcs_[q - 2 * n_];
        u[r] = col(a.from, r) - col(a.to, r);
      }
    }
  }

  std::size_t ratio_test(const std::vector<double>& u) const {
    std::size_t best = kNone;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < n_; ++r) {
      if (u[r] <= kPivotTol) continue;
      const double ratio = std::max(x_[r], 0.0) / u[r];
      if (ratio < best_ratio - 1e-13) {
        best = r;
        best_ratio = ratio;
      } else if (ratio <= best_ratio + 1e-13 && basis_[r] < basis_[best]) {
        best = r;
      }
    }
    return best;
  }

  void pivot(std::size_t q, std::size_t r, const std::vector<double>& u, double theta) {
    for (std::size_t k = 0; k < n_; ++k) x_[k] -= theta * u[k];
    x_[r] = theta;
    basis_[r] = q;
    double* prow = binv_.data() + r * n_;
    const double inv = 1.0 / u[r];
    for (std::size_t j = 0; j < n_; ++j) prow[j] *= inv;
    for (std::size_t k = 0; k < n_; ++k) {
      if (k == r || u[k] == 0.0) continue;
      double* row = binv_.data() + k * n_;
      const double f = u[k];
      for (std::size_t j = 0; j < n_; ++j) row[j] -= f * prow[j];
    }
  }

  void refactor() {
    const auto n = static_cast<Eigen::Index>(n_);
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t r = 0; r < n_; ++r) {
      const auto rr = static_cast<Eigen::Index>(r);
      const std::size_t q = basis_[r];
      if (q < n_) {
        b(static_cast<Eigen::Index>(q), rr) = 1.0;
      } else if (q < 2 * n_) {
        b(static_cast<Eigen::Index>(q - n_), rr) = -1.0;
      } else {
        const Arc& a = arcs_[q - 2 * n_];
        b(static_cast<Eigen::Index>(a.from), rr) = 1.0;
        b(static_cast<Eigen::Index>(a.to), rr) = -1.0;
      }
    }
    binv_ = b.partialPivLu().inverse();
    Eigen::Map<const Eigen::VectorXd> w(w_.data(), n);
    Eigen::VectorXd x = binv_ * w;
    for (std::size_t r = 0; r < n_; ++r) x_[r] = x(static_cast<Eigen::Index>(r));
  }

  FlatNormResult& finish(FlatNormResult& res, std::vector<double>& pi) {
    compute_multipliers(pi);
    res.optimal_f_values = pi;
    double primal = 0.0;
    for (std::size_t i = 0; i < n_; ++i) primal += w_[i] * pi[i];
    double dual = 0.0;
    for (std::size_t r = 0; r < n_; ++r) dual += cost(basis_[r]) * x_[r];
    res.value = std::max(primal, 0.0);
    if (res.status != LpStatus::optimal) return res;

    bool feasible = std::abs(primal - dual) <= kFeasibilityTol * (1.0 + std::abs(primal));
    for (std::size_t i = 0; i < n_ && feasible; ++i) {
      if (std::abs(pi[i]) > 1.0 + kFeasibilityTol) feasible = false;
      for (std::size_t j = 0; j < n_ && feasible; ++j) {
        if (pi[i] - pi[j] > dist_[i * n_ + j] + kFeasibilityTol) feasible = false;
      }
    }
    if (!feasible) res.status = LpStatus::infeasible_numerics;
    return res;
  }

  std::size_t n_;
  std::vector<double> w_;
  std::vector<double> dist_;
  std::vector<Arc> arcs_;
  std::vector<std::size_t> basis_;
  std::vector<double> x_;
  RowMatrix binv_;
};

std::vector<double> pairwise_distances(const DiscreteSignedMeasure& mu) {
  const std::size_t n = mu.size();
  const auto atoms = mu.atoms();
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      d[i * n + j] = d[j * n + i] = distance(mu.domain(), atoms[i].point, atoms[j].point);
  return d;
}

}  // namespace

FlatNormResult fm_norm(const DiscreteSignedMeasure& mu) {
  if (mu.empty()) return FlatNormResult{};
  std::vector<double> w;
  w.reserve(mu.size());
  for (const auto& a : mu.atoms()) w.push_back(a.weight);
  return TransportSimplex(std::move(w), pairwise_distances(mu)).solve();
}

double fm_distance(const DiscreteSignedMeasure& mu, const DiscreteSignedMeasure& nu) {
  const auto diff = linear_combine(1.0, mu, -1.0, nu);
  const auto res = fm_norm(diff);
  if (res.status != LpStatus::optimal)
    throw NumericalFailure("fm_distance: flat-norm LP did not certify optimality");
  return res.value;
}

// ---------------------------------------------------------------------------
// Vertex enumeration oracle.

namespace {

struct OracleSearch {
  std::size_t nodes;                 // support atoms + ground node 0
  std::vector<double> len;           // augmented metric, nodes x nodes
  std::vector<double> weight;        // weight[0] = 0 for the ground
  std::vector<std::size_t> order;    // BFS order from ground
  std::vector<std::size_t> parent;
  std::vector<double> f;
  double best = -std::numeric_limits<double>::infinity();

  double D(std::size_t a, std::size_t b) const { return len[a * nodes + b]; }

  void assign(std::size_t pos) {
    if (pos == order.size()) {
      double v = 0.0;
      for (std::size_t k = 1; k < nodes; ++k) v += weight[k] * f[k];
      best = std::max(best, v);
      return;
    }
    const std::size_t node = order[pos];
    const std::size_t par = parent[node];
    for (double sign : {1.0, -1.0}) {
      const double val = f[par] + sign * D(par, node);
      bool ok = true;
      for (std::size_t k = 0; k < pos && ok; ++k) {
        const std::size_t other = order[k];
        if (std::abs(val - f[other]) > D(node, other) + 1e-12) ok = false;
      }
      if (!ok) continue;
      f[node] = val;
      assign(pos + 1);
    }
  }

  void visit_tree(const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
    std::vector<std::vector<std::size_t>> adj(nodes);
    for (auto [a, b] : edges) {
      adj[a].push_back(b);
      adj[b].push_back(a);
    }
    order.assign(1, 0);
    parent.assign(nodes, 0);
    std::vector<bool> seen(nodes, false);
    seen[0] = true;
    for (std::size_t head = 0; head < order.size(); ++head) {
      for (std::size_t nb : adj[order[head]]) {
        if (seen[nb]) continue;
        seen[nb] = true;
        parent[nb] = order[head];
        order.push_back(nb);
      }
    }
    f.assign(nodes, 0.0);
    assign(1);
  }
};

// Decode a Pruefer sequence over labels 0..n-1 into the n-1 tree edges.
std::vector<std::pair<std::size_t, std::size_t>> pruefer_edges(
    const std::vector<std::size_t>& seq, std::size_t n) {
  std::vector<std::size_t> degree(n, 1);
  for (std::size_t s : seq) ++degree[s];
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t s : seq) {
    for (std::size_t leaf = 0; leaf < n; ++leaf) {
      if (degree[leaf] == 1) {
        edges.emplace_back(leaf, s);
        --degree[leaf];
        --degree[s];
        break;
      }
    }
  }
  std::size_t u = n;
  for (std::size_t k = 0; k < n; ++k) {
    if (degree[k] == 1) {
      if (u == n) {
        u = k;
      } else {
        edges.emplace_back(u, k);
        break;
      }
    }
  }
  return edges;
}

}  // namespace

double fm_norm_oracle(const DiscreteSignedMeasure& mu) {
  const std::size_t n = mu.size();
  if (n > kOracleMaxAtoms) throw std::invalid_argument("fm_norm_oracle: too many atoms");
  if (n == 0) return 0.0;

  OracleSearch search;
  search.nodes = n + 1;
  search.len.assign(search.nodes * search.nodes, 0.0);
  search.weight.assign(search.nodes, 0.0);
  const auto atoms = mu.atoms();
  for (std::size_t i = 0; i < n; ++i) {
    search.weight[i + 1] = atoms[i].weight;
    search.len[(i + 1) * search.nodes] = search.len[i + 1] = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      search.len[(i + 1) * search.nodes + (j + 1)] =
          distance(mu.domain(), atoms[i].point, atoms[j].point);
    }
  }

  const std::size_t labels = search.nodes;
  std::vector<std::size_t> seq(labels - 2, 0);
  while (true) {
    search.visit_tree(pruefer_edges(seq, labels));
    std::size_t k = 0;
    while (k < seq.size() && ++seq[k] == labels) seq[k++] = 0;
    if (k == seq.size()) break;
  }
  return std::max(search.best, 0.0);
}

}  // namespace mvt
