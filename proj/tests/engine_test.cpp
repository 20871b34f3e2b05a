#include "detwalk/engine.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "detwalk/chains.hpp"
#include "detwalk/router.hpp"

using namespace detwalk;

namespace {

// two-vertex chain with full support; the scripted emissions below do not
// depend on the probabilities
TransitionMatrix two_state() {
  return TransitionMatrix::from_dense({{0.5, 0.5}, {0.5, 0.5}});
}

}  // namespace

TEST(Step, WorkedTwoVertexExample) {
  // sigma_1 serves 4/3 within [0,7) and 3/1 within [7,11);
  // sigma_2 serves 2/1 within [0,3)
  auto P = two_state();
  std::vector<Router> routers;
  routers.push_back(Router::scripted({0, 0, 0, 0, 1, 1, 1, 0, 0, 0, 1}, 0));
  routers.push_back(Router::scripted({0, 0, 1}, 1));

  TokenConfiguration chi0{7, 0};
  auto [chi1, flow1] = step(chi0, routers, P);
  EXPECT_EQ(chi1, (TokenConfiguration{4, 3}));
  EXPECT_EQ(flow1.at(0, 0), 4);
  EXPECT_EQ(flow1.at(0, 1), 3);

  auto [chi2, flow2] = step(chi1, routers, P);
  EXPECT_EQ(chi2, (TokenConfiguration{5, 2}));
  EXPECT_EQ(flow2.at(0, 0), 3);
  EXPECT_EQ(flow2.at(0, 1), 1);
  EXPECT_EQ(flow2.at(1, 0), 2);
  EXPECT_EQ(flow2.at(1, 1), 1);
}

TEST(Step, SelfLoopAbsorbsForever) {
  auto P = TransitionMatrix::from_dense({{1.0}});
  std::vector<Router> routers{Router::for_vertex(RouterKind::Srt, P, 0)};
  TokenConfiguration chi{42};
  for (int t = 0; t < 20; ++t) {
    auto [next, flow] = step(chi, routers, P);
    EXPECT_EQ(next, chi);
    chi = next;
  }
}

TEST(Step, FlowRowsSumToServedTokens) {
  auto P = random_reversible_chain(8, 3, 19);
  std::vector<Router> routers;
  for (int v = 0; v < P.size(); ++v)
    routers.push_back(Router::for_vertex(RouterKind::Billiard, P, v));
  TokenConfiguration chi = uniform_config(P.size(), 101);
  for (int t = 0; t < 10; ++t) {
    auto [next, flow] = step(chi, routers, P);
    for (int v = 0; v < P.size(); ++v) {
      std::int64_t s = 0;
      for (std::int64_t z : flow.flows[v]) s += z;
      EXPECT_EQ(s, chi[v]);
    }
    chi = next;
  }
}

// Processing order inside a step cannot matter: emitting vertex by vertex in
// a shuffled order gives the same flows and configuration.
TEST(Step, VertexOrderIrrelevant) {
  auto P = random_reversible_chain(10, 4, 77);
  const int n = P.size();
  TokenConfiguration chi = uniform_config(n, 57);

  std::vector<Router> engine_routers, manual_routers;
  for (int v = 0; v < n; ++v) {
    engine_routers.push_back(Router::for_vertex(RouterKind::Srt, P, v));
    manual_routers.push_back(Router::for_vertex(RouterKind::Srt, P, v));
  }
  auto [next, flow] = step(chi, engine_routers, P);

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(123);
  std::shuffle(order.begin(), order.end(), rng);
  TokenConfiguration manual_next(n, 0);
  for (int v : order)
    for (std::int64_t j = 0; j < chi[v]; ++j) ++manual_next[manual_routers[v].next()];

  EXPECT_EQ(next, manual_next);
}

TEST(Run, ZeroStepsIsJustInitialState) {
  auto P = two_state();
  auto trace = run(point_mass_config(2, 0, 9), P, RouterKind::Srt, 0);
  EXPECT_EQ(trace.steps(), 0);
  EXPECT_EQ(trace.chi[0], (TokenConfiguration{9, 0}));
  EXPECT_EQ(trace.mu[0][0], 9.0);
}

TEST(Run, SingleTokenRotorWalksTheCycle) {
  // deterministic point mass circling a directed 3-cycle
  auto P = TransitionMatrix::from_dense(
      {{0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}, {1.0, 0.0, 0.0}});
  auto trace = run(point_mass_config(3, 0, 1), P, RouterKind::Rotor, 6);
  for (int t = 0; t <= 6; ++t) {
    for (int v = 0; v < 3; ++v)
      EXPECT_EQ(trace.chi[t][v], v == t % 3 ? 1 : 0) << "t=" << t;
  }
}

TEST(Run, TokenConservation) {
  auto P = random_reversible_chain(12, 4, 3);
  for (RouterKind kind : {RouterKind::Srt, RouterKind::Billiard, RouterKind::QuasiRandom,
                          RouterKind::Rotor}) {
    auto trace = run(uniform_config(P.size(), 1234), P, kind, 40);
    for (int t = 0; t <= 40; ++t) {
      std::int64_t m = 0;
      for (std::int64_t c : trace.chi[t]) m += c;
      ASSERT_EQ(m, 1234);
    }
  }
}

TEST(Run, MuStaysAtTotalMass) {
  auto P = random_reversible_chain(9, 3, 29);
  auto trace = run(point_mass_config(P.size(), 0, 1000), P, RouterKind::QuasiRandom, 200);
  EXPECT_EQ(trace.mu[0], std::vector<double>(trace.chi[0].begin(), trace.chi[0].end()));
  for (int t = 0; t <= 200; ++t) {
    double s = 0.0;
    for (double x : trace.mu[t]) s += x;
    ASSERT_NEAR(s, 1000.0, 1e-6);
  }
}

// Z_{v,u}^(t) must equal the definitional window count over
// [sum_{s<t} chi_v, sum_{s<=t} chi_v).
TEST(Run, FlowsMatchIntervalCountOracle) {
  auto P = random_reversible_chain(6, 3, 101);
  const int n = P.size();
  for (RouterKind kind : {RouterKind::Srt, RouterKind::Billiard, RouterKind::QuasiRandom,
                          RouterKind::Rotor}) {
    auto trace = run(uniform_config(n, 37), P, kind, 12, {.store_flows = true});
    std::vector<std::int64_t> prefix(n, 0);
    for (long t = 0; t < trace.steps(); ++t) {
      for (int v = 0; v < n; ++v) {
        const std::int64_t z = prefix[v];
        const std::int64_t zp = z + trace.chi[t][v];
        if (z == zp) continue;
        const auto row = P.row_probs(v);
        for (int pos = 0; pos < static_cast<int>(row.size()); ++pos)
          ASSERT_EQ(trace.flows[t].flows[v][pos], interval_count(kind, row, z, zp, pos))
              << "t=" << t << " v=" << v;
      }
      for (int v = 0; v < n; ++v) prefix[v] += trace.chi[t][v];
    }
  }
}

TEST(Run, DesyncIsHardError) {
  auto P = two_state();
  std::vector<Router> routers;
  for (int v = 0; v < 2; ++v) routers.push_back(Router::for_vertex(RouterKind::Srt, P, v));
  routers[0].next();  // advance behind the engine's back
  EXPECT_THROW(run_with_routers(point_mass_config(2, 0, 5), P, routers, 3),
               std::logic_error);
}

TEST(Run, OverflowGuard) {
  auto P = two_state();
  EXPECT_THROW(run(point_mass_config(2, 0, std::int64_t{1} << 40), P, RouterKind::Srt,
                   std::int64_t{1} << 40),
               std::invalid_argument);
}

TEST(Run, DeterministicAcrossThreadCounts) {
  auto P = random_reversible_chain(14, 4, 55);
  auto a = run(uniform_config(P.size(), 500), P, RouterKind::Srt, 30, {.threads = 1});
  auto b = run(uniform_config(P.size(), 500), P, RouterKind::Srt, 30, {.threads = 4});
  EXPECT_EQ(a.chi, b.chi);
  EXPECT_EQ(a.mu, b.mu);
  EXPECT_EQ(a.psi_measured, b.psi_measured);
}

TEST(MeasuredPsi, MatchesStreamedValueAndSrtBound) {
  auto P = random_reversible_chain(8, 3, 71);
  auto trace = run(uniform_config(P.size(), 250), P, RouterKind::Srt, 25,
                   {.store_flows = true});
  EXPECT_DOUBLE_EQ(measured_psi(trace, P), trace.psi_measured);
  EXPECT_LT(trace.psi_measured, 2.0);
}

TEST(MeasuredPsi, RotorBoundedByDeltaBar) {
  auto P = random_reversible_chain(8, 3, 72);
  std::int64_t dbar = 0;
  for (int v = 0; v < P.size(); ++v)
    dbar = std::max(dbar, rotor_common_denominator(P.row_probs(v)));
  auto trace = run(uniform_config(P.size(), 300), P, RouterKind::Rotor, 25);
  EXPECT_LE(trace.psi_measured, static_cast<double>(dbar) + 1e-9);
}

TEST(MeasuredPsi, ZeroOnAbsorbingLoop) {
  auto P = TransitionMatrix::from_dense({{1.0}});
  auto trace = run(TokenConfiguration{50}, P, RouterKind::Rotor, 5, {.store_flows = true});
  EXPECT_EQ(measured_psi(trace, P), 0.0);
}

TEST(MeasuredPsi, RequiresStoredFlows) {
  auto P = two_state();
  auto trace = run(point_mass_config(2, 0, 10), P, RouterKind::Srt, 3);
  EXPECT_THROW(measured_psi(trace, P), std::runtime_error);
}

TEST(InitialConfigs, UniformRemainderToLowestIndices) {
  auto chi = uniform_config(4, 10);
  EXPECT_EQ(chi, (TokenConfiguration{3, 3, 2, 2}));
  EXPECT_EQ(total_tokens(chi), 10);
}
