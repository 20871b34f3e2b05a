#include "detwalk/io.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "detwalk/chains.hpp"

using namespace detwalk;
using nlohmann::json;

TEST(ChainJson, RoundTripIsBitExact) {
  auto P = random_reversible_chain(13, 4, 2024);
  auto back = chain_from_json(chain_json(P));
  ASSERT_EQ(back.size(), P.size());
  for (int u = 0; u < P.size(); ++u) {
    ASSERT_EQ(back.degree(u), P.degree(u));
    for (const Arc& a : P.row(u)) EXPECT_EQ(back.at(u, a.to), a.p);
  }
}

TEST(ChainJson, LoaderEnforcesRowSums) {
  json bad{{"n", 1}, {"rows", json::array({json::array({json::array({0, 0.7})})})}};
  EXPECT_THROW(chain_from_json(bad), std::invalid_argument);
  json missing{{"rows", json::array()}};
  EXPECT_THROW(chain_from_json(missing), std::invalid_argument);
  json malformed{{"n", 1}, {"rows", json::array({json::array({json::array({0})})})}};
  EXPECT_THROW(chain_from_json(malformed), std::invalid_argument);
}

TEST(ProfileJson, CarriesTauTableAndTruncationFlags) {
  auto P = random_reversible_chain(20, 3, 9);
  auto prof = mixing_profile(P, 2, {.eps = {0.25, 1e-9}});
  auto j = profile_json(prof);
  EXPECT_EQ(j.at("pi").size(), 20u);
  EXPECT_EQ(j.at("h").size(), 3u);
  EXPECT_EQ(j.at("h_bar").size(), 3u);
  EXPECT_TRUE(j.at("tau").at("1e-09").is_null());
  ASSERT_TRUE(j.contains("truncated"));
  EXPECT_EQ(j.at("truncated")[0], "1e-09");
}

TEST(TraceCsv, HeaderAndExactRows) {
  auto P = TransitionMatrix::from_dense({{0.75, 0.25}, {0.25, 0.75}});
  auto trace = run(point_mass_config(2, 0, 4), P, RouterKind::Srt, 1);
  std::ostringstream out;
  write_trace_csv(trace, out);
  EXPECT_EQ(out.str(),
            "t,vertex,chi,mu,abs_discrepancy\n"
            "0,0,4,4,0\n"
            "0,1,0,0,0\n"
            "1,0,3,3,0\n"
            "1,1,1,1,0\n");
}

TEST(PerTimeCsv, OneRowPerStep) {
  auto P = TransitionMatrix::from_dense({{1.0}});
  auto trace = run(TokenConfiguration{5}, P, RouterKind::Rotor, 3);
  auto rep = discrepancy(trace);
  std::ostringstream out;
  write_per_time_csv(rep, out);
  EXPECT_EQ(out.str(),
            "t,max_abs_discrepancy\n"
            "0,0\n"
            "1,0\n"
            "2,0\n"
            "3,0\n");
}

TEST(SummaryJson, PrimaryBoundSelection) {
  auto P = random_reversible_chain(6, 2, 1);
  auto prof = mixing_profile(P, 60, {.with_h_bar = false});
  auto trace = run(uniform_config(6, 90), P, RouterKind::Billiard, 15);
  auto rep = discrepancy(trace);
  attach_bounds(rep, RouterKind::Billiard, {.profile = &prof});
  auto j = summary_json(trace, rep, "thm5_billiard");
  EXPECT_EQ(j.at("T"), 15);
  EXPECT_EQ(j.at("M"), 90);
  EXPECT_EQ(j.at("bound"), rep.bounds.at("thm5_billiard").value);
  EXPECT_EQ(j.at("bounds").at("thm4_billiard").at("satisfied"),
            rep.bounds.at("thm4_billiard").satisfied);
  auto none = summary_json(trace, rep, "nonexistent");
  EXPECT_TRUE(none.at("bound").is_null());
}
