#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "detwalk/chain.hpp"
#include "detwalk/parallel.hpp"
#include "detwalk/router.hpp"

namespace detwalk {

/// chi^(t): token counts per vertex. Conserved exactly across steps.
using TokenConfiguration = std::vector<std::int64_t>;

inline TokenConfiguration point_mass_config(int n, int v, std::int64_t tokens) {
  if (v < 0 || v >= n) throw std::invalid_argument("point_mass_config: vertex out of range");
  TokenConfiguration chi(n, 0);
  chi[v] = tokens;
  return chi;
}

/// tokens/n per vertex, remainder to the lowest indices.
inline TokenConfiguration uniform_config(int n, std::int64_t tokens) {
  TokenConfiguration chi(n, tokens / n);
  for (int v = 0; v < tokens % n; ++v) ++chi[v];
  return chi;
}

inline std::int64_t total_tokens(const TokenConfiguration& chi) {
  std::int64_t m = 0;
  for (std::int64_t c : chi) {
    if (c < 0) throw std::invalid_argument("token configuration: negative count");
    m += c;
  }
  return m;
}

/// Z^(t): tokens served (v -> u) in one update, aligned with each router's
/// neighbor order.
struct StepFlow {
  std::vector<std::vector<std::int64_t>> flows;  // flows[v][pos]

  std::int64_t at(int v, int pos) const { return flows[v][pos]; }
};

/// Full record of a run: chi^(0..T), mu^(0..T) with mu^(0) = chi^(0), flows
/// when retained, and the streamed deviation max |Z - chi P|.
struct TokenTrace {
  std::vector<TokenConfiguration> chi;
  std::vector<std::vector<double>> mu;
  std::vector<StepFlow> flows;                  // size steps() when stored, else empty
  std::vector<std::vector<int>> flow_neighbors;  // [v] -> neighbor ids aligned with flows
  bool flows_stored = false;
  double psi_measured = 0.0;
  std::int64_t tokens = 0;

  long steps() const { return static_cast<long>(chi.size()) - 1; }
};

namespace detail {

/// Probabilities aligned with each router's neighbor order, looked up in P.
inline std::vector<std::vector<double>> flow_probs(const std::vector<Router>& routers,
                                                   const TransitionMatrix& P) {
  std::vector<std::vector<double>> fp(routers.size());
  for (std::size_t v = 0; v < routers.size(); ++v) {
    const auto& nb = routers[v].neighbors();
    fp[v].reserve(nb.size());
    for (int u : nb) fp[v].push_back(P.at(static_cast<int>(v), u));
  }
  return fp;
}

inline std::pair<TokenConfiguration, StepFlow> step_impl(
    const TokenConfiguration& chi, std::vector<Router>& routers,
    const std::vector<std::vector<double>>& fp, double& psi, int threads) {
  const int n = static_cast<int>(chi.size());
  StepFlow flow;
  flow.flows.resize(n);
  std::vector<double> dev(n, 0.0);

  // Each vertex's emissions depend only on chi_v and its own router, so the
  // per-vertex work parallelizes; accumulation below stays in vertex order.
  parallel_for(n, threads, [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t v = lo; v < hi; ++v) {
      Router& r = routers[v];
      auto& z = flow.flows[v];
      z.assign(r.degree(), 0);
      for (std::int64_t j = 0; j < chi[v]; ++j) ++z[r.next_position()];
      double d = 0.0;
      for (int pos = 0; pos < r.degree(); ++pos) {
        const double e = std::abs(static_cast<double>(z[pos]) -
                                  static_cast<double>(chi[v]) * fp[v][pos]);
        if (e > d) d = e;
      }
      dev[v] = d;
    }
  });

  TokenConfiguration next(n, 0);
  for (int v = 0; v < n; ++v) {
    const auto& nb = routers[v].neighbors();
    for (int pos = 0; pos < static_cast<int>(nb.size()); ++pos)
      next[nb[pos]] += flow.flows[v][pos];
    if (dev[v] > psi) psi = dev[v];
  }
  return {std::move(next), std::move(flow)};
}

}  // namespace detail

/// One update chi^(t) -> chi^(t+1): vertex v emits chi_v tokens through its
/// router; the new configuration is the column sums of the resulting flows.
inline std::pair<TokenConfiguration, StepFlow> step(const TokenConfiguration& chi,
                                                    std::vector<Router>& routers,
                                                    const TransitionMatrix& P,
                                                    int threads = 0) {
  if (static_cast<int>(chi.size()) != P.size() || routers.size() != chi.size())
    throw std::invalid_argument("step: size mismatch");
  auto fp = detail::flow_probs(routers, P);
  double psi = 0.0;
  return detail::step_impl(chi, routers, fp, psi, threads > 0 ? threads : worker_threads());
}

struct RunOptions {
  bool store_flows = false;
  int threads = 0;  // 0: worker_threads()
};

/// Drives T steps with the given routers (advanced in place). Routers must be
/// fresh or consistent with a chi-prefix of zero; a served-count mismatch with
/// the running prefix sums is a hard error.
inline TokenTrace run_with_routers(const TokenConfiguration& chi0, const TransitionMatrix& P,
                                   std::vector<Router>& routers, long T,
                                   RunOptions opts = {}) {
  const int n = P.size();
  if (static_cast<int>(chi0.size()) != n || static_cast<int>(routers.size()) != n)
    throw std::invalid_argument("run: size mismatch");
  if (T < 0) throw std::invalid_argument("run: T must be >= 0");
  const std::int64_t tokens = total_tokens(chi0);
  if (tokens > 0 && T > (std::int64_t{1} << 62) / tokens)
    throw std::invalid_argument("run: M*T exceeds the 2^62 emission guard");
  const int threads = opts.threads > 0 ? opts.threads : worker_threads();

  TokenTrace trace;
  trace.tokens = tokens;
  trace.flows_stored = opts.store_flows;
  if (opts.store_flows) {
    trace.flow_neighbors.reserve(n);
    for (const Router& r : routers) trace.flow_neighbors.push_back(r.neighbors());
  }
  trace.chi.reserve(T + 1);
  trace.mu.reserve(T + 1);
  trace.chi.push_back(chi0);
  std::vector<double> mu(chi0.begin(), chi0.end());
  trace.mu.push_back(mu);

  auto fp = detail::flow_probs(routers, P);
  std::vector<std::int64_t> served_prefix(n, 0);
  std::vector<double> mu_scratch(n);

  for (long t = 0; t < T; ++t) {
    const TokenConfiguration& chi = trace.chi.back();
    for (int v = 0; v < n; ++v)
      if (routers[v].total_served() != served_prefix[v])
        throw std::logic_error("run: router served-count desynchronized at vertex " +
                               std::to_string(v));
    auto [next, flow] = detail::step_impl(chi, routers, fp, trace.psi_measured, threads);
    for (int v = 0; v < n; ++v) served_prefix[v] += chi[v];
    if (opts.store_flows) trace.flows.push_back(std::move(flow));
    trace.chi.push_back(std::move(next));

    detail::advance_in_place(mu, mu_scratch, P);
    trace.mu.push_back(mu);
  }
  return trace;
}

/// Runs the deterministic token process for T steps with fresh routers of the
/// given kind on every vertex. Identical inputs give identical traces.
inline TokenTrace run(const TokenConfiguration& chi0, const TransitionMatrix& P,
                      RouterKind kind, long T, RunOptions opts = {}) {
  std::vector<Router> routers;
  routers.reserve(P.size());
  for (int v = 0; v < P.size(); ++v) routers.push_back(Router::for_vertex(kind, P, v));
  return run_with_routers(chi0, P, routers, T, opts);
}

/// Psi_sigma of a stored-flow trace: max over t, v, u of |Z - chi_v P_{v,u}|.
/// Matches the streamed trace.psi_measured; requires store_flows.
inline double measured_psi(const TokenTrace& trace, const TransitionMatrix& P) {
  if (trace.steps() < 1) throw std::invalid_argument("measured_psi: trace has no steps");
  if (!trace.flows_stored)
    throw std::runtime_error("measured_psi: flows not retained; rerun with store_flows");
  double psi = 0.0;
  for (long t = 0; t < trace.steps(); ++t) {
    const auto& flow = trace.flows[t];
    for (int v = 0; v < P.size(); ++v) {
      const auto& nb = trace.flow_neighbors[v];
      for (std::size_t pos = 0; pos < flow.flows[v].size(); ++pos) {
        const double p = P.at(v, nb[pos]);
        const double e = std::abs(static_cast<double>(flow.flows[v][pos]) -
                                  static_cast<double>(trace.chi[t][v]) * p);
        if (e > psi) psi = e;
      }
    }
  }
  return psi;
}

}  // namespace detwalk
