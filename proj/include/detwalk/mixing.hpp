#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "detwalk/chain.hpp"
#include "detwalk/parallel.hpp"

namespace detwalk {

/// Derived mixing quantities of an ergodic chain: pi, the distance profiles
/// h(t) = max_w d_tv(P^t_{w,.}, pi) and h_bar(t) = max_{v,w} d_tv of rows,
/// tau(eps) = min{t : h(t) <= eps}, and the mixing rate t* = tau(1/4).
struct ChainProfile {
  Distribution pi{std::vector<double>{1.0}};
  double pi_min = 0.0;
  double pi_max = 0.0;
  int delta_max = 0;
  int t_max = 0;
  std::vector<double> h;                       // h[t] for t = 0..t_max
  std::vector<double> h_bar;                   // empty when not requested
  std::vector<std::vector<double>> dtv_to_pi;  // [t][v] = d_tv(P^t_{v,.}, pi)
  std::map<double, std::optional<int>> tau;    // nullopt: not reached by t_max
  std::optional<int> t_star;                   // tau(1/4)
};

namespace detail {

/// C = A * B for row-major n x n, parallel over rows of A. Each output row is
/// produced by exactly one thread in a fixed k-ascending order, so the result
/// is identical for every thread count.
inline void mat_mul(const std::vector<double>& A, const std::vector<double>& B,
                    std::vector<double>& C, int n, int threads) {
  parallel_for(n, threads, [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t i = lo; i < hi; ++i) {
      double* c = &C[static_cast<std::size_t>(i) * n];
      const double* a = &A[static_cast<std::size_t>(i) * n];
      for (int j = 0; j < n; ++j) c[j] = 0.0;
      for (int k = 0; k < n; ++k) {
        const double aik = a[k];
        if (aik == 0.0) continue;
        const double* b = &B[static_cast<std::size_t>(k) * n];
        for (int j = 0; j < n; ++j) c[j] += aik * b[j];
      }
    }
  });
}

inline double row_dtv(const double* row, const std::vector<double>& pi, int n) {
  double s = 0.0;
  for (int j = 0; j < n; ++j) s += std::abs(row[j] - pi[j]);
  return 0.5 * s;
}

}  // namespace detail

struct MixingOptions {
  std::vector<double> eps = {0.25};
  bool with_h_bar = true;
  int threads = 0;  // 0: worker_threads()
};

/// Tracks all N row distributions of P^t for t = 0..t_max and records the
/// exact h / h_bar profiles plus the tau(eps) table. tau entries that are not
/// reached by t_max stay unset.
inline ChainProfile mixing_profile(const TransitionMatrix& P, int t_max,
                                   MixingOptions opt = {}) {
  if (t_max < 1) throw std::invalid_argument("mixing_profile: t_max must be >= 1");
  const int n = P.size();
  const int threads = opt.threads > 0 ? opt.threads : worker_threads();

  ChainProfile prof;
  prof.pi = stationary_distribution(P);
  prof.delta_max = P.max_degree();
  prof.t_max = t_max;
  prof.pi_min = prof.pi[0];
  prof.pi_max = prof.pi[0];
  for (int v = 1; v < n; ++v) {
    prof.pi_min = std::min(prof.pi_min, prof.pi[v]);
    prof.pi_max = std::max(prof.pi_max, prof.pi[v]);
  }

  std::vector<double> eps = opt.eps;
  if (std::find(eps.begin(), eps.end(), 0.25) == eps.end()) eps.push_back(0.25);
  for (double e : eps) prof.tau[e] = std::nullopt;

  const std::vector<double>& pi = prof.pi.values();
  std::vector<double> Pd = P.dense();
  std::vector<double> D(static_cast<std::size_t>(n) * n, 0.0);
  for (int v = 0; v < n; ++v) D[static_cast<std::size_t>(v) * n + v] = 1.0;
  std::vector<double> scratch(D.size());

  prof.h.resize(t_max + 1);
  prof.dtv_to_pi.assign(t_max + 1, std::vector<double>(n, 0.0));
  if (opt.with_h_bar) prof.h_bar.resize(t_max + 1);

  for (int t = 0; t <= t_max; ++t) {
    auto& dtv_t = prof.dtv_to_pi[t];
    parallel_for(n, threads, [&](std::int64_t lo, std::int64_t hi) {
      for (std::int64_t v = lo; v < hi; ++v)
        dtv_t[v] = detail::row_dtv(&D[static_cast<std::size_t>(v) * n], pi, n);
    });
    double h = 0.0;
    for (int v = 0; v < n; ++v) h = std::max(h, dtv_t[v]);
    prof.h[t] = h;
    for (auto& [e, slot] : prof.tau)
      if (!slot && h <= e) slot = t;

    if (opt.with_h_bar) {
      std::vector<double> per_v(n, 0.0);
      parallel_for(n, threads, [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t v = lo; v < hi; ++v) {
          double m = 0.0;
          const double* rv = &D[static_cast<std::size_t>(v) * n];
          for (int w = static_cast<int>(v) + 1; w < n; ++w) {
            const double* rw = &D[static_cast<std::size_t>(w) * n];
            double s = 0.0;
            for (int j = 0; j < n; ++j) s += std::abs(rv[j] - rw[j]);
            m = std::max(m, 0.5 * s);
          }
          per_v[v] = m;
        }
      });
      double hb = 0.0;
      for (int v = 0; v < n; ++v) hb = std::max(hb, per_v[v]);
      prof.h_bar[t] = hb;
    }

    if (t < t_max) {
      detail::mat_mul(D, Pd, scratch, n, threads);
      D.swap(scratch);
    }
  }

  prof.t_star = prof.tau[0.25];
  return prof;
}

/// Exact tau(eps) for each requested eps by iterating the full matrix power
/// until all thresholds are reached. Throws when the cap is exceeded, naming
/// the first unreached eps.
inline std::map<double, int> tau_values(const TransitionMatrix& P,
                                        const std::vector<double>& eps_list,
                                        int t_cap = 100000, int threads = 0) {
  if (eps_list.empty()) throw std::invalid_argument("tau_values: empty eps list");
  for (double e : eps_list)
    if (!(e > 0.0)) throw std::invalid_argument("tau_values: eps must be positive");
  const int n = P.size();
  if (threads <= 0) threads = worker_threads();

  const Distribution pi = stationary_distribution(P);
  std::vector<double> Pd = P.dense();
  std::vector<double> D(static_cast<std::size_t>(n) * n, 0.0);
  for (int v = 0; v < n; ++v) D[static_cast<std::size_t>(v) * n + v] = 1.0;
  std::vector<double> scratch(D.size());

  std::map<double, int> out;
  for (int t = 0; t <= t_cap; ++t) {
    std::vector<double> per_v(n, 0.0);
    parallel_for(n, threads, [&](std::int64_t lo, std::int64_t hi) {
      for (std::int64_t v = lo; v < hi; ++v)
        per_v[v] = detail::row_dtv(&D[static_cast<std::size_t>(v) * n], pi.values(), n);
    });
    double h = 0.0;
    for (int v = 0; v < n; ++v) h = std::max(h, per_v[v]);
    for (double e : eps_list)
      if (!out.count(e) && h <= e) out[e] = t;
    if (out.size() == eps_list.size()) return out;
    detail::mat_mul(D, Pd, scratch, n, threads);
    D.swap(scratch);
  }
  for (double e : eps_list)
    if (!out.count(e))
      throw std::runtime_error("tau_values: tau(" + std::to_string(e) +
                               ") not reached within t_cap " + std::to_string(t_cap));
  return out;
}

/// Mixing rate t* = tau(1/4).
inline int mixing_rate(const TransitionMatrix& P, int t_cap = 100000, int threads = 0) {
  return tau_values(P, {0.25}, t_cap, threads).at(0.25);
}

}  // namespace detwalk
