#include "cli.hpp"

#include "knnlab/csv.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using knnlab::cli::run;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "knnlab");
  std::vector<const char*> argv;
  for (const auto& a : args) {
    argv.push_back(a.c_str());
  }
  std::ostringstream out;
  std::ostringstream err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("knnlab_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

const std::vector<std::string> kSmallStudy{"--n_min", "2048", "--n_max", "16384", "--n_points", "4", "--grid", "40"};

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST_F(CliTest, KernelCheckHappyPath) {
  const Outcome o = invoke({"kernel-check", "--kernel", "gaussian:p=1:r=1", "--out-dir", path("kc")});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_TRUE(fs::exists(path("kc/manifest.txt")));
  const std::string moments = slurp(path("kc/moments.csv"));
  EXPECT_EQ(moments.substr(0, moments.find('\n')), "degree,max_abs_moment");
  const std::string manifest = slurp(path("kc/manifest.txt"));
  EXPECT_NE(manifest.find("version=" + knnlab::cli::version_string()), std::string::npos);
  EXPECT_NE(manifest.find("kernel=gaussian:p=1:r=1"), std::string::npos);
  EXPECT_NE(manifest.find("seed="), std::string::npos);
}

TEST_F(CliTest, AssumptionViolationExitsTwo) {
  const Outcome o = invoke({"rate-study", "--c1", "0.4", "--out-dir", path("rs")});
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.err.find("c1"), std::string::npos);
  EXPECT_NE(o.err.find("Assumption 5"), std::string::npos);
  EXPECT_NE(o.err.find("(1/2, 1)"), std::string::npos);
  EXPECT_EQ(std::count(o.err.begin(), o.err.end(), '\n'), 1);
  EXPECT_FALSE(fs::exists(path("rs/per_n.csv")));

  EXPECT_NE(invoke({"rate-study", "--c2", "0.2"}).err.find("Assumption 6"), std::string::npos);
  EXPECT_NE(invoke({"rate-study", "--C_M", "0"}).err.find("Assumption 7"), std::string::npos);
  EXPECT_EQ(invoke({"rate-study", "--kernel", "box:p=1:r=1"}).code, 2);
  EXPECT_EQ(invoke({"rate-study", "--trials", "3"}).code, 2);
  EXPECT_EQ(invoke({"rate-study", "--model", "M9"}).code, 2);
}

TEST_F(CliTest, UnknownKeysExitTwo) {
  Outcome o = invoke({"rate-study", "--set", "colour=red"});
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.err.find("colour"), std::string::npos);

  knnlab::write_text_file(path("bad.cfg"), "model = M3\nwidth = 3\n");
  o = invoke({"rate-study", "--config", path("bad.cfg")});
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.err.find("width"), std::string::npos);

  EXPECT_EQ(invoke({"rate-study", "--no-such-flag", "1"}).code, 2);
  EXPECT_EQ(invoke({}).code, 2);
}

TEST_F(CliTest, RateStudyOutputsAndReproducibility) {
  const auto args = concat({"rate-study", "--model", "M1", "--target", "regression", "--trials", "10"}, kSmallStudy);
  ASSERT_EQ(invoke(concat(args, {"--out-dir", path("a"), "--threads", "1"})).code, 0);
  ASSERT_EQ(invoke(concat(args, {"--out-dir", path("b"), "--threads", "4"})).code, 0);
  const std::string per_n = slurp(path("a/per_n.csv"));
  EXPECT_EQ(per_n.substr(0, per_n.find('\n')), "n,k_n,b_n,M_n,mean_sup_error,median,q10,q90,clip_rate,theory_rate");
  EXPECT_EQ(std::count(per_n.begin(), per_n.end(), '\n'), 5);
  EXPECT_EQ(per_n, slurp(path("b/per_n.csv")));
  EXPECT_EQ(slurp(path("a/summary.csv")), slurp(path("b/summary.csv")));
  EXPECT_TRUE(fs::exists(path("a/certification.csv")));
  const std::string manifest = slurp(path("a/manifest.txt"));
  EXPECT_NE(manifest.find("seed=1"), std::string::npos);
  EXPECT_NE(manifest.find("threads=1"), std::string::npos);
}

TEST_F(CliTest, ConfigPrecedence) {
  knnlab::write_text_file(path("study.cfg"),
                          "# scaled-down study\nmodel = M3\nseed = 5\ntrials = 10\nn_min = 256\nn_max = 2048\n"
                          "n_points = 4\ngrid = 40\nc1 = 0.6\n");
  ASSERT_EQ(invoke({"rate-study", "--config", path("study.cfg"), "--set", "seed=6", "--c1", "0.65", "--out-dir",
                    path("out")})
                .code,
            0);
  const std::string manifest = slurp(path("out/manifest.txt"));
  EXPECT_NE(manifest.find("seed=6"), std::string::npos);
  EXPECT_NE(manifest.find("c1=0.65"), std::string::npos);
  EXPECT_NE(manifest.find("model=M3"), std::string::npos);
}

TEST_F(CliTest, ThreadsEnvironmentFallback) {
  ::setenv("KNN_LAB_THREADS", "2", 1);
  const auto args = concat({"rate-study", "--trials", "10", "--out-dir", path("env")}, kSmallStudy);
  ASSERT_EQ(invoke(args).code, 0);
  EXPECT_NE(slurp(path("env/manifest.txt")).find("threads=2"), std::string::npos);
  ::setenv("KNN_LAB_THREADS", "lots", 1);
  EXPECT_EQ(invoke(args).code, 2);
  ::unsetenv("KNN_LAB_THREADS");
}

TEST_F(CliTest, EstimateWritesColumns) {
  knnlab::write_text_file(path("data.csv"), "x1,y\n-1,2\n1,4\n");
  knnlab::write_text_file(path("grid.csv"), "x1\n0\n0.5\n");
  const Outcome o = invoke({"estimate", "--data", path("data.csv"), "--grid", path("grid.csv"), "--kernel",
                            "gaussian_product:p=1:r=1", "--c1", "0.7", "--c2", "0.05", "--target", "g", "--k", "2",
                            "--out", path("est/out.csv")});
  ASSERT_EQ(o.code, 0) << o.err;
  const auto table = knnlab::read_numeric_csv(path("est/out.csv"));
  EXPECT_EQ(table.header, (std::vector<std::string>{"x1", "value", "radius_used", "floored"}));
  ASSERT_EQ(table.rows.size(), 2u);
  EXPECT_NEAR(table.rows[0][1], 0.725912173557430049393490578808, 1e-15);
  EXPECT_EQ(table.rows[0][2], 1.0);
  EXPECT_TRUE(fs::exists(path("est/manifest.txt")));
}

TEST_F(CliTest, EstimateValidation) {
  knnlab::write_text_file(path("data.csv"), "x1\n-1\n1\n");
  knnlab::write_text_file(path("grid2.csv"), "x1,x2\n0,0\n");
  Outcome o = invoke({"estimate", "--data", path("data.csv"), "--grid", path("grid2.csv"), "--out", path("o.csv")});
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.err.find("grid"), std::string::npos);
  knnlab::write_text_file(path("grid.csv"), "x1\n0\n");
  o = invoke({"estimate", "--data", path("data.csv"), "--grid", path("grid.csv"), "--target", "regression", "--out",
              path("o.csv")});
  EXPECT_EQ(o.code, 2);
  o = invoke({"estimate", "--data", path("missing.csv"), "--grid", path("grid.csv"), "--out", path("o.csv")});
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.err.find("data"), std::string::npos);
}

TEST_F(CliTest, RuntimeFailureExitsThree) {
  knnlab::write_text_file(path("dup.csv"), "x1\n5\n5\n5\n");
  knnlab::write_text_file(path("grid.csv"), "x1\n5\n");
  const Outcome o =
      invoke({"estimate", "--data", path("dup.csv"), "--grid", path("grid.csv"), "--k", "2", "--out", path("o.csv")});
  EXPECT_EQ(o.code, 3);
  EXPECT_NE(o.err.find("radius"), std::string::npos);
}

TEST_F(CliTest, SandwichAndBiasCheck) {
  ASSERT_EQ(invoke({"sandwich", "--n", "2000", "--grid", "50", "--out-dir", path("sw")}).code, 0);
  const auto summary = knnlab::read_numeric_csv(path("sw/sandwich_summary.csv"));
  EXPECT_EQ(summary.rows.at(0).at(6), 0.0);
  EXPECT_TRUE(fs::exists(path("sw/sandwich.csv")));
  EXPECT_EQ(invoke({"sandwich", "--kernel", "poly_gaussian_order_r:p=1:r=3"}).code, 2);

  ASSERT_EQ(invoke({"bias-check", "--x", "0.25", "--D2", "0.04", "--halvings", "2", "--out-dir", path("bc")}).code, 0);
  const auto bias = knnlab::read_numeric_csv(path("bc/bias.csv"));
  ASSERT_EQ(bias.rows.size(), 3u);
  EXPECT_NEAR(bias.rows[1][6], 4.0, 0.2);
  EXPECT_EQ(invoke({"bias-check", "--x", "5"}).code, 2);
}

TEST_F(CliTest, BenchAgreement) {
  const Outcome o =
      invoke({"bench", "--n", "100000", "--p", "3", "--queries", "1000", "--out-dir", path("bench")});
  ASSERT_EQ(o.code, 0) << o.err;
  const auto table = knnlab::read_numeric_csv(path("bench/bench.csv"));
  EXPECT_EQ(table.header.back(), "agreement");
  EXPECT_EQ(table.rows.at(0).back(), 1000.0);
  EXPECT_EQ(invoke({"bench", "--k", "0"}).code, 2);
}
