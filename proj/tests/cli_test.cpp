#include <gtest/gtest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kCli = DETWALK_CLI_PATH;

struct CommandResult {
  int exit_code;
  std::string output;  // stdout + stderr
};

CommandResult run_cli(const std::string& args, const fs::path& dir,
                      const std::string& env = "") {
  const fs::path out = dir / "cmd_output.txt";
  std::string cmd = env;
  if (!env.empty()) cmd += " ";
  cmd += kCli + " " + args + " > " + out.string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  std::ifstream in(out);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WEXITSTATUS(rc), ss.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("detwalk_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, RunEmitsSummaryWithSrtPsiBelowTwo) {
  auto res = run_cli("run --gen 'knapsack:a=1,1;b=1' --router srt --M 100 --T 1000 "
                     "--summary " + (dir_ / "s.json").string(), dir_);
  ASSERT_EQ(res.exit_code, 0) << res.output;
  auto summary = json::parse(slurp(dir_ / "s.json"));
  EXPECT_LT(summary.at("psi_measured").get<double>(), 2.0);
  EXPECT_EQ(summary.at("M"), 100);
  EXPECT_EQ(summary.at("T"), 1000);
  EXPECT_TRUE(summary.at("bound_satisfied").get<bool>());
}

TEST_F(CliTest, PointMassRotorTrace) {
  const auto trace_path = dir_ / "t.csv";
  auto res = run_cli("run --gen 'matching:edges=0-1,1-2' --router rotor --M 1 --T 10 "
                     "--trace " + trace_path.string() + " --summary " +
                     (dir_ / "s.json").string(), dir_);
  ASSERT_EQ(res.exit_code, 0) << res.output;
  const std::string csv = slurp(trace_path);
  EXPECT_NE(csv.find("t,vertex,chi,mu,abs_discrepancy"), std::string::npos);
  // 11 time steps x 3 states + header
  int lines = 0;
  for (char c : csv)
    if (c == '\n') ++lines;
  EXPECT_EQ(lines, 34);
}

TEST_F(CliTest, ValidationFailureNamesProperty) {
  {
    std::ofstream out(dir_ / "bad.json");
    out << R"({"n": 2, "rows": [[[0, 0.5], [1, 0.5]], [[0, 1.0]]]})";
  }
  auto ok = run_cli("run --chain " + (dir_ / "bad.json").string() +
                    " --router srt --M 10 --T 5", dir_);
  EXPECT_EQ(ok.exit_code, 0);  // row sums fine, chain valid

  {
    std::ofstream out(dir_ / "periodic.json");
    out << R"({"n": 2, "rows": [[[1, 1.0]], [[0, 1.0]]]})";
  }
  auto res = run_cli("run --chain " + (dir_ / "periodic.json").string() +
                     " --router srt --M 10 --T 5", dir_);
  EXPECT_EQ(res.exit_code, 1);
  EXPECT_NE(res.output.find("aperiodic"), std::string::npos);

  {
    std::ofstream out(dir_ / "badsum.json");
    out << R"({"n": 1, "rows": [[[0, 0.9]]]})";
  }
  res = run_cli("run --chain " + (dir_ / "badsum.json").string() +
                " --router srt --M 10 --T 5", dir_);
  EXPECT_EQ(res.exit_code, 1);
  EXPECT_NE(res.output.find("row 0"), std::string::npos);
}

TEST_F(CliTest, NonReversibleOnlyWarns) {
  {
    std::ofstream out(dir_ / "cycle3.json");
    out << R"({"n": 3, "rows": [[[0,0.5],[1,0.5]], [[1,0.5],[2,0.5]], [[0,0.5],[2,0.5]]]})";
  }
  auto res = run_cli("run --chain " + (dir_ / "cycle3.json").string() +
                     " --router srt --M 20 --T 10 --summary " +
                     (dir_ / "s.json").string(), dir_);
  EXPECT_EQ(res.exit_code, 0) << res.output;
  EXPECT_NE(res.output.find("not reversible"), std::string::npos);
  auto summary = json::parse(slurp(dir_ / "s.json"));
  EXPECT_FALSE(summary.at("reversible").get<bool>());
}

TEST_F(CliTest, IdenticalConfigGivesIdenticalBytes) {
  const std::string cmd = "run --gen 'linext:n=4;rel=1<3' --router billiard --M 500 --T 50 "
                          "--trace {T} --summary {S}";
  auto subst = [&](std::string s, const std::string& t, const std::string& sm) {
    s.replace(s.find("{T}"), 3, t);
    s.replace(s.find("{S}"), 3, sm);
    return s;
  };
  auto a = run_cli(subst(cmd, (dir_ / "a.csv").string(), (dir_ / "a.json").string()), dir_);
  auto b = run_cli(subst(cmd, (dir_ / "b.csv").string(), (dir_ / "b.json").string()), dir_);
  ASSERT_EQ(a.exit_code, 0);
  ASSERT_EQ(b.exit_code, 0);
  EXPECT_EQ(slurp(dir_ / "a.csv"), slurp(dir_ / "b.csv"));
  EXPECT_EQ(slurp(dir_ / "a.json"), slurp(dir_ / "b.json"));
}

TEST_F(CliTest, GenRoundTripsThroughRunAndMixing) {
  auto gen = run_cli("gen knapsack --a 1,1,1,1 --b 2 --out " + (dir_ / "k.json").string(),
                     dir_);
  ASSERT_EQ(gen.exit_code, 0) << gen.output;
  auto labels = json::parse(slurp(dir_ / "k.json.labels.json"));
  EXPECT_EQ(labels.size(), 11u);  // C(4,0)+C(4,1)+C(4,2) = 1+4+6

  auto run_res = run_cli("run --chain " + (dir_ / "k.json").string() +
                         " --router vdc --M 1000 --T 100 --verify-bounds --summary " +
                         (dir_ / "s.json").string(), dir_);
  EXPECT_EQ(run_res.exit_code, 0) << run_res.output;

  auto mix = run_cli("mixing --chain " + (dir_ / "k.json").string() +
                     " --t-max 40 --eps 0.25,0.1 --out " + (dir_ / "p.json").string(), dir_);
  ASSERT_EQ(mix.exit_code, 0) << mix.output;
  auto prof = json::parse(slurp(dir_ / "p.json"));
  EXPECT_EQ(prof.at("pi").size(), 11u);
  EXPECT_TRUE(prof.at("tau").contains("0.25"));
  EXPECT_EQ(prof.at("h").size(), 41u);
}

TEST_F(CliTest, SummaryBoundsRecomputeFromStoredInputs) {
  auto res = run_cli("run --gen 'knapsack:a=1,1,1;b=2' --router srt --M 200 --T 60 "
                     "--summary " + (dir_ / "s.json").string(), dir_);
  ASSERT_EQ(res.exit_code, 0) << res.output;
  auto summary = json::parse(slurp(dir_ / "s.json"));
  const double ratio = summary.at("pi_ratio").get<double>();
  const double t_star = summary.at("t_star").get<int>();
  const double delta = summary.at("delta_max").get<int>();
  const double expect = 6.0 * ratio * t_star * delta;
  EXPECT_EQ(summary.at("bounds").at("thm2_srt").at("value").get<double>(), expect);
}

TEST_F(CliTest, PerTimeCsv) {
  auto res = run_cli("run --gen 'knapsack:a=1,1;b=1' --router vdc --M 50 --T 20 "
                     "--per-time " + (dir_ / "pt.csv").string() + " --summary " +
                     (dir_ / "s.json").string(), dir_);
  ASSERT_EQ(res.exit_code, 0) << res.output;
  const std::string csv = slurp(dir_ / "pt.csv");
  EXPECT_NE(csv.find("t,max_abs_discrepancy"), std::string::npos);
  int lines = 0;
  for (char c : csv)
    if (c == '\n') ++lines;
  EXPECT_EQ(lines, 22);  // header + t = 0..20
}

TEST_F(CliTest, VerifyLemmaOneResidualLine) {
  auto res = run_cli("run --gen 'random:n=5;degree=2;seed=4' --router billiard "
                     "--M 60 --T 30 --verify-lemma1 --summary " +
                     (dir_ / "s.json").string(), dir_);
  ASSERT_EQ(res.exit_code, 0) << res.output;
  auto summary = json::parse(slurp(dir_ / "s.json"));
  EXPECT_LE(summary.at("lemma1_residual_max").get<double>(), 1e-8);
}

TEST_F(CliTest, VerifyRouterTable) {
  auto res = run_cli("verify-router --router vdc --row 1/2,1/4,1/4 --z-max 2000 --seed 9",
                     dir_);
  EXPECT_EQ(res.exit_code, 0);
  EXPECT_NE(res.output.find("RESULT PASS"), std::string::npos);

  auto rotor = run_cli("verify-router --router rotor --row 1/2,1/4,1/4 --z-max 1500 --seed 2",
                       dir_);
  EXPECT_EQ(rotor.exit_code, 0);
  EXPECT_NE(rotor.output.find("delta_bar=4"), std::string::npos);
}

TEST_F(CliTest, VerifyRouterRejectsBadRow) {
  auto res = run_cli("verify-router --router srt --row 0.5,0.4 --z-max 100 --seed 1", dir_);
  EXPECT_EQ(res.exit_code, 1);
  EXPECT_NE(res.output.find("sums to"), std::string::npos);
}

TEST_F(CliTest, UnknownRouterFails) {
  auto res = run_cli("run --gen 'knapsack:a=1;b=1' --router bogus --M 1 --T 1", dir_);
  EXPECT_EQ(res.exit_code, 1);
  EXPECT_NE(res.output.find("unknown router"), std::string::npos);
}

TEST_F(CliTest, RotorOnIrrationalChainFails) {
  auto res = run_cli("run --gen 'random:n=6;degree=2;seed=3;irrational=1' "
                     "--router rotor --M 10 --T 5", dir_);
  EXPECT_EQ(res.exit_code, 1);
  EXPECT_NE(res.output.find("rotor"), std::string::npos);
}
