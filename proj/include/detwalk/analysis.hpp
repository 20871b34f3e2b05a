#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "detwalk/chain.hpp"
#include "detwalk/engine.hpp"
#include "detwalk/mixing.hpp"
#include "detwalk/router.hpp"

namespace detwalk {

constexpr double kBoundTolerance = 1e-6;  // additive slack for "bound satisfied"

struct BoundEntry {
  double value = 0.0;
  bool satisfied = false;
};

/// Single-vertex discrepancy of a trace plus the closed-form bound checks.
struct DiscrepancyReport {
  std::vector<double> per_time_max;  // max_w |chi_w^(t) - mu_w^(t)| per t
  double global_max = 0.0;
  double psi_measured = 0.0;
  std::map<std::string, BoundEntry> bounds;
};

/// Exact per-time maxima of |chi - mu| (chi integral, mu real). Bounds are
/// left for attach_bounds.
inline DiscrepancyReport discrepancy(const TokenTrace& trace) {
  DiscrepancyReport rep;
  rep.psi_measured = trace.psi_measured;
  rep.per_time_max.reserve(trace.chi.size());
  for (std::size_t t = 0; t < trace.chi.size(); ++t) {
    double m = 0.0;
    for (std::size_t v = 0; v < trace.chi[t].size(); ++v)
      m = std::max(m, std::abs(static_cast<double>(trace.chi[t][v]) - trace.mu[t][v]));
    rep.per_time_max.push_back(m);
    rep.global_max = std::max(rep.global_max, m);
  }
  return rep;
}

/// Inputs shared by the closed-form discrepancy bounds.
struct BoundInputs {
  const ChainProfile* profile = nullptr;
  double gamma = 0.25;             // for the generic bound
  std::optional<int> tau_gamma;    // tau(gamma); defaults to t* when gamma = 1/4
  std::int64_t delta_bar_max = 0;  // rotor only
  std::int64_t tokens = 0;         // quasi-random only
};

namespace detail {

inline double lg(double x) { return std::log2(x); }

inline int require_t_star(const BoundInputs& in) {
  if (!in.profile) throw std::invalid_argument("theoretical_bound: profile required");
  if (!in.profile->t_star)
    throw std::runtime_error("theoretical_bound: t* not reached within profile t_max");
  return *in.profile->t_star;
}

}  // namespace detail

/// Evaluates the applicable closed-form bounds on |chi_w - mu_w| for a vertex
/// with stationary mass pi_w. psi (when supplied) feeds the generic bound.
inline std::map<std::string, double> theoretical_bound_at(RouterKind kind,
                                                          const BoundInputs& in,
                                                          double pi_w,
                                                          std::optional<double> psi) {
  if (!(in.gamma > 0.0 && in.gamma < 0.5))
    throw std::invalid_argument("theoretical_bound: gamma must lie in (0, 1/2)");
  const int t_star = detail::require_t_star(in);
  const double ratio = pi_w / in.profile->pi_min;
  const double delta = static_cast<double>(in.profile->delta_max);

  std::map<std::string, double> out;
  if (psi) {
    std::optional<int> tg = in.tau_gamma;
    if (!tg && in.gamma == 0.25) tg = t_star;
    if (!tg)
      throw std::invalid_argument("theoretical_bound: tau(gamma) required for gamma != 1/4");
    out["thm1_generic"] = *psi * (2.0 * (1.0 - in.gamma) / (1.0 - 2.0 * in.gamma)) *
                          static_cast<double>(*tg) * ratio * delta;
  }
  switch (kind) {
    case RouterKind::Srt:
      out["thm2_srt"] = 6.0 * ratio * t_star * delta;
      break;
    case RouterKind::Billiard:
      out["thm4_billiard"] = 3.0 * ratio * t_star * delta * (delta - 1.0);
      out["thm5_billiard"] = 6.0 * ratio * t_star * (delta - 1.0);
      break;
    case RouterKind::QuasiRandom:
      if (in.tokens < 1)
        throw std::invalid_argument("theoretical_bound: token count required for vdc");
      out["thm7_vdc"] =
          6.0 * ratio * detail::lg(static_cast<double>(in.tokens) + 1.0) * t_star * delta;
      break;
    case RouterKind::Rotor:
      if (in.delta_bar_max < 1)
        throw std::invalid_argument("theoretical_bound: delta_bar required for rotor");
      out["thm8_rotor"] = 3.0 * ratio * t_star * delta * static_cast<double>(in.delta_bar_max);
      out["thm9_rotor"] = 3.0 * ratio * t_star * static_cast<double>(in.delta_bar_max);
      break;
    case RouterKind::Scripted:
      break;  // only the generic bound applies
  }
  return out;
}

/// Worst-case form: evaluated at the vertex maximizing pi_w, i.e. with the
/// ratio pi_max/pi_min.
inline std::map<std::string, double> theoretical_bound(RouterKind kind, const BoundInputs& in,
                                                       std::optional<double> psi = {}) {
  if (!in.profile) throw std::invalid_argument("theoretical_bound: profile required");
  return theoretical_bound_at(kind, in, in.profile->pi_max, psi);
}

/// Fills report.bounds with the worst-case bounds and their satisfied flags
/// (global_max <= value + 1e-6).
inline void attach_bounds(DiscrepancyReport& rep, RouterKind kind, const BoundInputs& in,
                          std::optional<double> psi = {}) {
  for (const auto& [name, value] : theoretical_bound(kind, in, psi))
    rep.bounds[name] = {value, rep.global_max <= value + kBoundTolerance};
}

/// Residual of the telescoping flow identity
///   chi_w^(T) - mu_w^(T)
///     = sum_{t<T} sum_u sum_{v in N(u)} (Z_{v,u}^(t) - chi_v^(t) P_{v,u})
///                                       (P^{T-t-1}_{u,w} - pi_w).
/// Column w of P^s is built by the vector recurrence col(s+1) = P col(s);
/// summation runs in fixed (t, v, neighbor) order. Requires stored flows.
inline double lemma1_residual(const TokenTrace& trace, const TransitionMatrix& P,
                              const Distribution& pi, long T, int w) {
  if (!trace.flows_stored)
    throw std::runtime_error("lemma1_residual: flows not retained; rerun with store_flows");
  if (T < 0 || T > trace.steps())
    throw std::invalid_argument("lemma1_residual: T outside trace");
  if (w < 0 || w >= P.size()) throw std::invalid_argument("lemma1_residual: bad vertex");
  const int n = P.size();

  // cols[s][u] = P^s_{u,w}
  std::vector<std::vector<double>> cols(static_cast<std::size_t>(std::max<long>(T, 1)));
  cols[0].assign(n, 0.0);
  cols[0][w] = 1.0;
  for (long s = 1; s < T; ++s) {
    cols[s].assign(n, 0.0);
    for (int u = 0; u < n; ++u) {
      double acc = 0.0;
      for (const Arc& a : P.row(u)) acc += a.p * cols[s - 1][a.to];
      cols[s][u] = acc;
    }
  }

  const double lhs = static_cast<double>(trace.chi[T][w]) - trace.mu[T][w];
  double rhs = 0.0;
  for (long t = 0; t < T; ++t) {
    const auto& col = cols[T - t - 1];
    const auto& flow = trace.flows[t];
    for (int v = 0; v < n; ++v) {
      const auto& nb = trace.flow_neighbors[v];
      const double chi_v = static_cast<double>(trace.chi[t][v]);
      for (std::size_t pos = 0; pos < nb.size(); ++pos) {
        const int u = nb[pos];
        rhs += (static_cast<double>(flow.flows[v][pos]) - chi_v * P.at(v, u)) *
               (col[u] - pi[w]);
      }
    }
  }
  return std::abs(lhs - rhs);
}

/// Exact partial sum sum_{t<T} d_tv(P^t_{v,.}, pi) from a computed profile.
inline double dtv_sum(const ChainProfile& profile, long T, int v) {
  if (T < 0 || T > profile.t_max + 1)
    throw std::invalid_argument("dtv_sum: T exceeds profile t_max");
  if (v < 0 || v >= profile.pi.size()) throw std::invalid_argument("dtv_sum: bad vertex");
  double s = 0.0;
  for (long t = 0; t < T; ++t) s += profile.dtv_to_pi[t][v];
  return s;
}

}  // namespace detwalk
