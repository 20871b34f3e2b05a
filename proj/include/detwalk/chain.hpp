#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace detwalk {

constexpr double kRowSumTolerance = 1e-9;
constexpr double kDetailedBalanceTolerance = 1e-9;
constexpr double kStationaryResidual = 1e-13;
constexpr long kStationaryIterationCap = 1000000;

/// One outgoing arc of the transition diagram: P_{v, to} = p with p > 0.
struct Arc {
  int to;
  double p;
};

/// Dense row-stochastic transition matrix over states {0, .., n-1}, stored as
/// sparse rows sorted by target. Stored entries are strictly positive, so the
/// stored sparsity pattern is exactly the transition diagram.
class TransitionMatrix {
 public:
  TransitionMatrix() = default;

  /// Builds from explicit (neighbor, probability) rows. Entries with p <= 0,
  /// out-of-range indices or duplicate targets are rejected; row sums are NOT
  /// checked here (validate_chain reports them).
  static TransitionMatrix from_rows(int n, std::vector<std::vector<Arc>> rows) {
    if (n < 1) throw std::invalid_argument("TransitionMatrix: n must be >= 1");
    if (static_cast<int>(rows.size()) != n)
      throw std::invalid_argument("TransitionMatrix: row count != n");
    TransitionMatrix m;
    m.n_ = n;
    m.rows_ = std::move(rows);
    for (int v = 0; v < n; ++v) {
      auto& row = m.rows_[v];
      std::sort(row.begin(), row.end(), [](const Arc& a, const Arc& b) { return a.to < b.to; });
      int prev = -1;
      for (const Arc& a : row) {
        if (a.to < 0 || a.to >= n)
          throw std::invalid_argument("TransitionMatrix: neighbor index out of range in row " +
                                      std::to_string(v));
        if (a.to == prev)
          throw std::invalid_argument("TransitionMatrix: duplicate neighbor in row " +
                                      std::to_string(v));
        if (!(a.p > 0.0))
          throw std::invalid_argument("TransitionMatrix: nonpositive entry stored in row " +
                                      std::to_string(v));
        prev = a.to;
      }
    }
    return m;
  }

  static TransitionMatrix from_dense(const std::vector<std::vector<double>>& d) {
    const int n = static_cast<int>(d.size());
    std::vector<std::vector<Arc>> rows(n);
    for (int v = 0; v < n; ++v) {
      if (static_cast<int>(d[v].size()) != n)
        throw std::invalid_argument("TransitionMatrix: dense input not square");
      for (int u = 0; u < n; ++u) {
        if (d[v][u] < 0.0)
          throw std::invalid_argument("TransitionMatrix: negative entry in row " +
                                      std::to_string(v));
        if (d[v][u] > 0.0) rows[v].push_back({u, d[v][u]});
      }
    }
    return from_rows(n, std::move(rows));
  }

  int size() const { return n_; }

  const std::vector<Arc>& row(int v) const { return rows_[v]; }

  /// Dense accessor P[u][v]; zero outside the transition diagram.
  double at(int u, int v) const {
    const auto& r = rows_[u];
    auto it = std::lower_bound(r.begin(), r.end(), v,
                               [](const Arc& a, int t) { return a.to < t; });
    return (it != r.end() && it->to == v) ? it->p : 0.0;
  }

  /// delta(v): out-degree in the transition diagram (self-loop counts).
  int degree(int v) const { return static_cast<int>(rows_[v].size()); }

  /// Delta: maximum degree of the transition diagram.
  int max_degree() const {
    int d = 0;
    for (int v = 0; v < n_; ++v) d = std::max(d, degree(v));
    return d;
  }

  double row_sum(int v) const {
    double s = 0.0;
    for (const Arc& a : rows_[v]) s += a.p;
    return s;
  }

  std::vector<int> neighbors(int v) const {
    std::vector<int> out;
    out.reserve(rows_[v].size());
    for (const Arc& a : rows_[v]) out.push_back(a.to);
    return out;
  }

  std::vector<double> row_probs(int v) const {
    std::vector<double> out;
    out.reserve(rows_[v].size());
    for (const Arc& a : rows_[v]) out.push_back(a.p);
    return out;
  }

  /// Row-major dense copy, for matrix-power routines.
  std::vector<double> dense() const {
    std::vector<double> d(static_cast<std::size_t>(n_) * n_, 0.0);
    for (int v = 0; v < n_; ++v)
      for (const Arc& a : rows_[v]) d[static_cast<std::size_t>(v) * n_ + a.to] = a.p;
    return d;
  }

 private:
  int n_ = 0;
  std::vector<std::vector<Arc>> rows_;
};

/// Probability distribution over the state set: nonnegative, sums to 1
/// within 1e-9.
class Distribution {
 public:
  explicit Distribution(std::vector<double> values) : values_(std::move(values)) {
    double s = 0.0;
    for (double v : values_) {
      if (v < 0.0) throw std::invalid_argument("Distribution: negative entry");
      s += v;
    }
    if (std::abs(s - 1.0) > kRowSumTolerance)
      throw std::invalid_argument("Distribution: sum " + std::to_string(s) + " != 1");
  }

  static Distribution uniform(int n) {
    return Distribution(std::vector<double>(n, 1.0 / n));
  }

  static Distribution point_mass(int n, int v) {
    std::vector<double> x(n, 0.0);
    x.at(v) = 1.0;
    return Distribution(std::move(x));
  }

  int size() const { return static_cast<int>(values_.size()); }
  double operator[](int i) const { return values_[i]; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> values_;
};

/// d_tv(xi, zeta) = (1/2) ||xi - zeta||_1, always in [0, 1].
inline double total_variation(const Distribution& xi, const Distribution& zeta) {
  if (xi.size() != zeta.size())
    throw std::invalid_argument("total_variation: length mismatch");
  double s = 0.0;
  for (int i = 0; i < xi.size(); ++i) s += std::abs(xi[i] - zeta[i]);
  return 0.5 * s;
}

/// d_pw(xi, zeta) = ||xi - zeta||_inf.
inline double point_wise_distance(const Distribution& xi, const Distribution& zeta) {
  if (xi.size() != zeta.size())
    throw std::invalid_argument("point_wise_distance: length mismatch");
  double m = 0.0;
  for (int i = 0; i < xi.size(); ++i) m = std::max(m, std::abs(xi[i] - zeta[i]));
  return m;
}

namespace detail {

/// One in-place step xi <- xi * P using the sparse rows.
inline void advance_in_place(std::vector<double>& xi, std::vector<double>& scratch,
                             const TransitionMatrix& P) {
  std::fill(scratch.begin(), scratch.end(), 0.0);
  for (int v = 0; v < P.size(); ++v) {
    const double x = xi[v];
    if (x == 0.0) continue;
    for (const Arc& a : P.row(v)) scratch[a.to] += x * a.p;
  }
  xi.swap(scratch);
}

}  // namespace detail

/// xi * P^t by repeated vector-matrix products; evolve(xi, P, 0) == xi.
inline Distribution evolve(const Distribution& xi, const TransitionMatrix& P, long t) {
  if (xi.size() != P.size()) throw std::invalid_argument("evolve: length mismatch");
  if (t < 0) throw std::invalid_argument("evolve: t must be >= 0");
  std::vector<double> x = xi.values();
  std::vector<double> scratch(x.size(), 0.0);
  for (long s = 0; s < t; ++s) detail::advance_in_place(x, scratch, P);
  return Distribution(std::move(x));
}

/// Stationary distribution of an ergodic chain by dense power iteration.
///
/// Iterates the half-lazy matrix Q = (P + I)/2, which has the same fixed point
/// and converges for every irreducible chain (periodic included), then checks
/// the residual against P itself. Stops once ||pi P - pi||_inf <= 1e-13; the
/// iteration cap of 10^6 is reported by name on failure.
inline Distribution stationary_distribution(const TransitionMatrix& P) {
  const int n = P.size();
  std::vector<double> xi(n, 1.0 / n), nxt(n);
  for (long it = 0; it < kStationaryIterationCap; ++it) {
    std::fill(nxt.begin(), nxt.end(), 0.0);
    for (int v = 0; v < n; ++v) {
      const double x = 0.5 * xi[v];
      nxt[v] += x;
      for (const Arc& a : P.row(v)) nxt[a.to] += x * a.p;
    }
    double res = 0.0;
    for (int v = 0; v < n; ++v) res = std::max(res, std::abs(nxt[v] - xi[v]));
    xi.swap(nxt);
    // ||xi P - xi|| = 2 ||xi Q - xi||, so half the target residual here.
    if (2.0 * res <= kStationaryResidual) {
      double s = std::accumulate(xi.begin(), xi.end(), 0.0);
      for (double& v : xi) v /= s;
      return Distribution(std::move(xi));
    }
  }
  throw std::runtime_error(
      "stationary_distribution: not converged within iteration cap " +
      std::to_string(kStationaryIterationCap));
}

struct RowIssue {
  int row;
  double sum;
};

struct ValidationReport {
  bool stochastic = false;
  bool irreducible = false;
  bool aperiodic = false;
  bool reversible = false;
  std::vector<RowIssue> bad_rows;  // rows whose sum is off by more than 1e-9

  bool ergodic() const { return stochastic && irreducible && aperiodic; }
  bool ok() const { return ergodic() && reversible; }
};

namespace detail {

inline std::vector<int> reachable(const TransitionMatrix& P, int start, bool reversed) {
  const int n = P.size();
  std::vector<std::vector<int>> adj(n);
  for (int v = 0; v < n; ++v)
    for (const Arc& a : P.row(v)) {
      if (reversed)
        adj[a.to].push_back(v);
      else
        adj[v].push_back(a.to);
    }
  std::vector<int> seen(n, 0);
  std::queue<int> q;
  q.push(start);
  seen[start] = 1;
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    for (int u : adj[v])
      if (!seen[u]) {
        seen[u] = 1;
        q.push(u);
      }
  }
  return seen;
}

/// Period of the strongly connected component containing `root`, restricted to
/// the states marked in `in_scc`: gcd over arcs (u,v) inside the component of
/// lvl(u) + 1 - lvl(v) with BFS levels. Returns 0 if the component has no arc.
inline long scc_period(const TransitionMatrix& P, int root, const std::vector<int>& in_scc) {
  const int n = P.size();
  std::vector<long> lvl(n, -1);
  std::queue<int> q;
  q.push(root);
  lvl[root] = 0;
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    for (const Arc& a : P.row(v)) {
      if (!in_scc[a.to]) continue;
      if (lvl[a.to] < 0) {
        lvl[a.to] = lvl[v] + 1;
        q.push(a.to);
      }
    }
  }
  long g = 0;
  for (int v = 0; v < n; ++v) {
    if (!in_scc[v] || lvl[v] < 0) continue;
    for (const Arc& a : P.row(v)) {
      if (!in_scc[a.to] || lvl[a.to] < 0) continue;
      g = std::gcd(g, std::abs(lvl[v] + 1 - lvl[a.to]));
    }
  }
  return g;
}

/// Strongly connected components by Tarjan (iterative); returns component id
/// per state.
inline std::vector<int> scc_ids(const TransitionMatrix& P) {
  const int n = P.size();
  std::vector<int> index(n, -1), low(n, 0), on_stack(n, 0), comp(n, -1);
  std::vector<int> stack;
  int next_index = 0, next_comp = 0;
  struct Frame {
    int v;
    std::size_t edge;
  };
  for (int s = 0; s < n; ++s) {
    if (index[s] >= 0) continue;
    std::vector<Frame> call{{s, 0}};
    index[s] = low[s] = next_index++;
    stack.push_back(s);
    on_stack[s] = 1;
    while (!call.empty()) {
      Frame& f = call.back();
      const auto& row = P.row(f.v);
      if (f.edge < row.size()) {
        int u = row[f.edge++].to;
        if (index[u] < 0) {
          index[u] = low[u] = next_index++;
          stack.push_back(u);
          on_stack[u] = 1;
          call.push_back({u, 0});
        } else if (on_stack[u]) {
          low[f.v] = std::min(low[f.v], index[u]);
        }
      } else {
        if (low[f.v] == index[f.v]) {
          while (true) {
            int w = stack.back();
            stack.pop_back();
            on_stack[w] = 0;
            comp[w] = next_comp;
            if (w == f.v) break;
          }
          ++next_comp;
        }
        int v = f.v;
        call.pop_back();
        if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
      }
    }
  }
  return comp;
}

}  // namespace detail

/// Checks stochasticity, irreducibility (strong connectivity of the transition
/// diagram), aperiodicity (every SCC with a cycle has period 1), and
/// reversibility (detailed balance against the stationary distribution, within
/// 1e-9). Reversibility is only attempted on irreducible chains, where pi is
/// unique.
inline ValidationReport validate_chain(const TransitionMatrix& P) {
  ValidationReport rep;
  const int n = P.size();

  rep.stochastic = true;
  for (int v = 0; v < n; ++v) {
    const double s = P.row_sum(v);
    if (std::abs(s - 1.0) > kRowSumTolerance) {
      rep.stochastic = false;
      rep.bad_rows.push_back({v, s});
    }
  }

  auto fwd = detail::reachable(P, 0, false);
  auto bwd = detail::reachable(P, 0, true);
  rep.irreducible = true;
  for (int v = 0; v < n; ++v)
    if (!fwd[v] || !bwd[v]) {
      rep.irreducible = false;
      break;
    }

  // Aperiodicity per component; components without any internal arc carry no
  // cycle and do not constrain the gcd.
  auto comp = detail::scc_ids(P);
  int ncomp = 0;
  for (int v = 0; v < n; ++v) ncomp = std::max(ncomp, comp[v] + 1);
  rep.aperiodic = true;
  for (int c = 0; c < ncomp; ++c) {
    std::vector<int> in_scc(n, 0);
    int root = -1;
    for (int v = 0; v < n; ++v)
      if (comp[v] == c) {
        in_scc[v] = 1;
        if (root < 0) root = v;
      }
    long g = detail::scc_period(P, root, in_scc);
    if (g > 1) {
      rep.aperiodic = false;
      break;
    }
  }

  if (rep.irreducible && rep.stochastic) {
    Distribution pi = stationary_distribution(P);
    rep.reversible = true;
    for (int u = 0; u < n && rep.reversible; ++u)
      for (const Arc& a : P.row(u)) {
        const double lhs = pi[u] * a.p;
        const double rhs = pi[a.to] * P.at(a.to, u);
        if (std::abs(lhs - rhs) > kDetailedBalanceTolerance) {
          rep.reversible = false;
          break;
        }
      }
  }
  return rep;
}

}  // namespace detwalk
