#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "detwalk/chain.hpp"

namespace detwalk {

constexpr std::int64_t kEnumerationCap = 200000;

/// A generated benchmark chain: the matrix plus one human-readable label per
/// state (the sidecar content).
struct GeneratedChain {
  TransitionMatrix P;
  std::vector<std::string> labels;
};

// ---------------------------------------------------------------------------
// 0-1 knapsack solutions
// ---------------------------------------------------------------------------

/// Feasible bit vectors {x : sum a_i x_i <= b} as masks (x_i = bit i-1),
/// ascending mask order.
inline std::vector<std::uint32_t> enumerate_knapsack(const std::vector<std::int64_t>& a,
                                                     std::int64_t b) {
  const int n = static_cast<int>(a.size());
  if (n < 1 || n > 20) throw std::invalid_argument("knapsack: need 1 <= n <= 20");
  for (std::int64_t w : a)
    if (w <= 0) throw std::invalid_argument("knapsack: weights must be positive");
  if (b <= 0) throw std::invalid_argument("knapsack: b must be positive");
  std::vector<std::uint32_t> states;
  for (std::uint32_t m = 0; m < (1u << n); ++m) {
    std::int64_t w = 0;
    for (int i = 0; i < n; ++i)
      if (m >> i & 1u) w += a[i];
    if (w <= b) {
      states.push_back(m);
      if (static_cast<std::int64_t>(states.size()) > kEnumerationCap)
        throw std::invalid_argument("knapsack: state space exceeds cap (> " +
                                    std::to_string(kEnumerationCap) + " states)");
    }
  }
  return states;
}

/// Lazy single-flip walk on the knapsack solutions: P(x,y) = 1/2n for feasible
/// Hamming-1 neighbors, self-loop absorbs the rest. Symmetric, so pi is
/// uniform.
inline GeneratedChain knapsack_chain(const std::vector<std::int64_t>& a, std::int64_t b) {
  const int n = static_cast<int>(a.size());
  const auto states = enumerate_knapsack(a, b);
  std::map<std::uint32_t, int> index;
  for (int i = 0; i < static_cast<int>(states.size()); ++i) index[states[i]] = i;

  const double step_p = 1.0 / (2.0 * n);
  std::vector<std::vector<Arc>> rows(states.size());
  std::vector<std::string> labels(states.size());
  for (int i = 0; i < static_cast<int>(states.size()); ++i) {
    const std::uint32_t m = states[i];
    int nbrs = 0;
    for (int k = 0; k < n; ++k) {
      const std::uint32_t y = m ^ (1u << k);
      auto it = index.find(y);
      if (it != index.end()) {
        rows[i].push_back({it->second, step_p});
        ++nbrs;
      }
    }
    rows[i].push_back({i, 1.0 - nbrs * step_p});
    std::string lab(n, '0');
    for (int k = 0; k < n; ++k)
      if (m >> k & 1u) lab[k] = '1';
    labels[i] = lab;
  }
  return {TransitionMatrix::from_rows(static_cast<int>(states.size()), std::move(rows)),
          std::move(labels)};
}

// ---------------------------------------------------------------------------
// Linear extensions of a poset
// ---------------------------------------------------------------------------

/// Partial order on {0, .., n-1}: (i, j) means i precedes j.
struct PosetInstance {
  int n = 0;
  std::vector<std::pair<int, int>> relations;
};

/// All linear extensions as element sequences, lexicographic order. Throws on
/// cyclic relations.
inline std::vector<std::vector<int>> enumerate_linear_extensions(const PosetInstance& poset) {
  const int n = poset.n;
  if (n < 1 || n > 8) throw std::invalid_argument("linext: need 1 <= n <= 8");
  for (auto [i, j] : poset.relations)
    if (i < 0 || i >= n || j < 0 || j >= n || i == j)
      throw std::invalid_argument("linext: bad relation");

  // cycle check via Kahn's algorithm
  std::vector<int> indeg(n, 0);
  for (auto [i, j] : poset.relations) (void)i, ++indeg[j];
  std::vector<int> order;
  std::vector<int> deg = indeg;
  for (int round = 0; round < n; ++round) {
    int pick = -1;
    for (int v = 0; v < n; ++v)
      if (deg[v] == 0) {
        pick = v;
        break;
      }
    if (pick < 0) throw std::invalid_argument("linext: relations contain a cycle");
    deg[pick] = -1;
    for (auto [i, j] : poset.relations)
      if (i == pick) --deg[j];
  }

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::vector<int>> out;
  do {
    std::vector<int> pos(n);
    for (int p = 0; p < n; ++p) pos[perm[p]] = p;
    bool ok = true;
    for (auto [i, j] : poset.relations)
      if (pos[i] >= pos[j]) {
        ok = false;
        break;
      }
    if (ok) out.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

/// Adjacent-transposition walk on linear extensions with position weight
/// F(p) = p(n-p) / ((n^3 - n)/6): P(X, X') = F(p)/2 when X' swaps positions
/// p, p+1 of X and stays an extension. Uniform stationary distribution.
inline GeneratedChain linear_extension_chain(const PosetInstance& poset) {
  const int n = poset.n;
  const auto exts = enumerate_linear_extensions(poset);
  if (exts.empty()) throw std::invalid_argument("linext: no linear extensions");
  std::map<std::vector<int>, int> index;
  for (int i = 0; i < static_cast<int>(exts.size()); ++i) index[exts[i]] = i;

  const double norm = (static_cast<double>(n) * n * n - n) / 6.0;
  std::vector<std::vector<Arc>> rows(exts.size());
  std::vector<std::string> labels(exts.size());
  for (int i = 0; i < static_cast<int>(exts.size()); ++i) {
    const auto& X = exts[i];
    double out_p = 0.0;
    std::vector<Arc> arcs;
    for (int p = 1; p < n; ++p) {
      std::vector<int> Y = X;
      std::swap(Y[p - 1], Y[p]);
      auto it = index.find(Y);
      if (it == index.end()) continue;
      const double f = static_cast<double>(p) * (n - p) / norm;
      arcs.push_back({it->second, f / 2.0});
      out_p += f / 2.0;
    }
    arcs.push_back({i, 1.0 - out_p});
    rows[i] = std::move(arcs);
    std::string lab;
    for (int v : X) lab += std::to_string(v + 1);
    labels[i] = lab;
  }
  return {TransitionMatrix::from_rows(static_cast<int>(exts.size()), std::move(rows)),
          std::move(labels)};
}

// ---------------------------------------------------------------------------
// Matchings in a graph
// ---------------------------------------------------------------------------

/// All matchings of the edge list as edge masks, ascending mask order.
inline std::vector<std::uint32_t> enumerate_matchings(
    const std::vector<std::pair<int, int>>& edges) {
  const int m = static_cast<int>(edges.size());
  if (m > 16) throw std::invalid_argument("matching: need m <= 16 edges");
  std::set<std::pair<int, int>> seen;
  for (auto [u, v] : edges) {
    if (u < 0 || v < 0 || u == v) throw std::invalid_argument("matching: bad edge");
    auto key = std::minmax(u, v);
    if (!seen.insert({key.first, key.second}).second)
      throw std::invalid_argument("matching: duplicate edge");
  }
  std::vector<std::uint32_t> states;
  for (std::uint32_t s = 0; s < (1u << m); ++s) {
    bool ok = true;
    for (int i = 0; i < m && ok; ++i) {
      if (!(s >> i & 1u)) continue;
      for (int j = i + 1; j < m && ok; ++j) {
        if (!(s >> j & 1u)) continue;
        if (edges[i].first == edges[j].first || edges[i].first == edges[j].second ||
            edges[i].second == edges[j].first || edges[i].second == edges[j].second)
          ok = false;
      }
    }
    if (ok) {
      states.push_back(s);
      if (static_cast<std::int64_t>(states.size()) > kEnumerationCap)
        throw std::invalid_argument("matching: state space exceeds cap");
    }
  }
  return states;
}

/// Jerrum-Sinclair style walk on all matchings: pick an edge e at rate 1/2m
/// and remove it, add it, or slide it over the unique conflicting edge;
/// self-loop absorbs the rest. Symmetric, so pi is uniform.
inline GeneratedChain matching_chain(const std::vector<std::pair<int, int>>& edges) {
  const int m = static_cast<int>(edges.size());
  if (m == 0)  // only the empty matching
    return {TransitionMatrix::from_rows(1, {{{0, 1.0}}}), {"-"}};
  const auto states = enumerate_matchings(edges);
  std::map<std::uint32_t, int> index;
  for (int i = 0; i < static_cast<int>(states.size()); ++i) index[states[i]] = i;

  int nverts = 0;
  for (auto [u, v] : edges) nverts = std::max({nverts, u + 1, v + 1});

  std::vector<std::vector<Arc>> rows(states.size());
  std::vector<std::string> labels(states.size());
  for (int i = 0; i < static_cast<int>(states.size()); ++i) {
    const std::uint32_t s = states[i];
    std::vector<int> matched_by(nverts, -1);
    for (int k = 0; k < m; ++k)
      if (s >> k & 1u) {
        matched_by[edges[k].first] = k;
        matched_by[edges[k].second] = k;
      }
    std::map<int, double> out;  // target index -> probability
    int moves = 0;
    for (int k = 0; k < m; ++k) {
      const auto [u, v] = edges[k];
      std::uint32_t target;
      if (s >> k & 1u) {
        target = s & ~(1u << k);
      } else {
        const bool mu = matched_by[u] >= 0, mv = matched_by[v] >= 0;
        if (!mu && !mv) {
          target = s | (1u << k);
        } else if (mu != mv) {
          const int conflict = mu ? matched_by[u] : matched_by[v];
          target = (s | (1u << k)) & ~(1u << conflict);
        } else {
          continue;  // both endpoints matched: e in N_C, no move
        }
      }
      out[index.at(target)] += 1.0 / (2.0 * m);
      ++moves;
    }
    std::vector<Arc> arcs;
    double out_p = 0.0;
    for (auto [j, p] : out) {
      arcs.push_back({j, p});
      out_p += p;
    }
    const double self = 1.0 - static_cast<double>(moves) / (2.0 * m);
    (void)out_p;
    bool merged = false;
    for (Arc& a : arcs)
      if (a.to == i) {
        a.p += self;
        merged = true;
      }
    if (!merged && self > 0.0) arcs.push_back({i, self});
    rows[i] = std::move(arcs);
    std::string lab(m, '0');
    for (int k = 0; k < m; ++k)
      if (s >> k & 1u) lab[k] = '1';
    labels[i] = lab;
  }
  return {TransitionMatrix::from_rows(static_cast<int>(states.size()), std::move(rows)),
          std::move(labels)};
}

// ---------------------------------------------------------------------------
// Random reversible test chains
// ---------------------------------------------------------------------------

/// Lazy Metropolis-style walk on a random connected graph, reversible against
/// the uniform distribution. Rational entries (denominator 2 * max degree) by
/// default; with `irrational`, symmetric per-edge weights in {1, sqrt 2} make
/// the entries irrational while keeping P symmetric. Deterministic per seed.
inline TransitionMatrix random_reversible_chain(int n, int degree, std::uint64_t seed,
                                                bool irrational = false) {
  if (n < 2) throw std::invalid_argument("random_reversible_chain: n must be >= 2");
  if (degree < 1 || degree >= n)
    throw std::invalid_argument("random_reversible_chain: need 1 <= degree < n");
  std::mt19937_64 rng(seed);

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = n - 1; i > 0; --i)
    std::swap(perm[i], perm[rng() % static_cast<std::uint64_t>(i + 1)]);

  std::set<std::pair<int, int>> edges;
  auto add_edge = [&](int u, int v) {
    if (u > v) std::swap(u, v);
    if (u != v) edges.insert({u, v});
  };
  for (int k = 1; k < n; ++k)
    add_edge(perm[k], perm[rng() % static_cast<std::uint64_t>(k)]);
  const std::int64_t want =
      std::min<std::int64_t>(static_cast<std::int64_t>(n) * degree / 2,
                             static_cast<std::int64_t>(n) * (n - 1) / 2);
  int guard = 0;
  while (static_cast<std::int64_t>(edges.size()) < want && guard++ < 100 * n * degree)
    add_edge(static_cast<int>(rng() % n), static_cast<int>(rng() % n));

  std::vector<std::vector<std::pair<int, double>>> adj(n);
  for (auto [u, v] : edges) {
    const double w = irrational && (rng() & 1u) ? std::sqrt(2.0) : 1.0;
    adj[u].push_back({v, w});
    adj[v].push_back({u, w});
  }
  double smax = 0.0;
  for (int v = 0; v < n; ++v) {
    double s = 0.0;
    for (auto [u, w] : adj[v]) (void)u, s += w;
    smax = std::max(smax, s);
  }
  const double denom = 2.0 * smax;

  std::vector<std::vector<Arc>> rows(n);
  for (int v = 0; v < n; ++v) {
    double s = 0.0;
    for (auto [u, w] : adj[v]) {
      rows[v].push_back({u, w / denom});
      s += w / denom;
    }
    rows[v].push_back({v, 1.0 - s});  // >= 1/2: lazy, hence aperiodic
  }
  return TransitionMatrix::from_rows(n, std::move(rows));
}

}  // namespace detwalk
