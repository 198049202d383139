#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "cli.hpp"
#include "omwu/bench.hpp"
#include "omwu/game.hpp"

namespace omwu {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("omwu_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
    write("fixture.json", R"({"A": [[3, 1], [0, 2]]})");
    write("zero.json", R"({"A": [[0, 0], [0, 0]]})");
  }
  void TearDown() override { fs::remove_all(dir_); }

  void write(const std::string& name, const std::string& text) {
    std::ofstream(dir_ / name) << text;
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  static std::string slurp(const std::string& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
  }

  int run(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return cli::run(args, out_, err_);
  }

  fs::path dir_;
  std::ostringstream out_;
  std::ostringstream err_;
};

TEST_F(CliTest, ExactJson) {
  ASSERT_EQ(run({"exact", "--game", path("fixture.json"), "--json"}), 0) << err_.str();
  const auto j = nlohmann::json::parse(out_.str());
  EXPECT_NEAR(j["value"].get<double>(), 1.5, 1e-9);
  EXPECT_NEAR(j["x"][0].get<double>(), 0.5, 1e-9);
  EXPECT_NEAR(j["y"][1].get<double>(), 0.75, 1e-9);
  EXPECT_TRUE(j["unique"].get<bool>());
}

TEST_F(CliTest, ExactReportsNonUnique) {
  ASSERT_EQ(run({"exact", "--game", path("zero.json"), "--json"}), 0);
  EXPECT_FALSE(nlohmann::json::parse(out_.str())["unique"].get<bool>());
}

TEST_F(CliTest, SolveWritesLog) {
  ASSERT_EQ(run({"solve", "--game", path("fixture.json"), "--eta", "0.01", "--target-error", "0.1",
                 "--log", path("traj.csv"), "--log-every", "100", "--json"}),
            0)
      << err_.str();
  const auto j = nlohmann::json::parse(out_.str());
  EXPECT_TRUE(j["converged"].get<bool>());
  EXPECT_LE(j["final"]["l1_error"].get<double>(), 0.1);
  const std::string log = slurp(path("traj.csv"));
  EXPECT_EQ(log.rfind("iter,kl,l1_error", 0), 0u);
  EXPECT_GT(std::count(log.begin(), log.end(), '\n'), 2);
}

TEST_F(CliTest, SolveMwuText) {
  ASSERT_EQ(run({"solve", "--game", path("fixture.json"), "--method", "mwu", "--max-iters", "50"}), 0);
  EXPECT_NE(out_.str().find("method      mwu"), std::string::npos);
  EXPECT_NE(out_.str().find("iterations  50"), std::string::npos);
}

TEST_F(CliTest, SolveRejectsBadInput) {
  EXPECT_NE(run({"solve", "--game", path("fixture.json"), "--method", "sgd"}), 0);
  EXPECT_EQ(run({"solve", "--game", path("fixture.json"), "--eta", "2"}), 1);
  EXPECT_NE(err_.str().find("omwu: error:"), std::string::npos);
  EXPECT_EQ(run({"solve", "--game", path("missing.json")}), 1);
}

TEST_F(CliTest, SpectralCertificate) {
  ASSERT_EQ(run({"spectral", "--game", path("fixture.json"), "--eta", "0.01", "--json"}), 0)
      << err_.str();
  const auto j = nlohmann::json::parse(out_.str());
  EXPECT_TRUE(j["certified"].get<bool>());
  EXPECT_LT(j["spectral_radius"].get<double>(), 1.0);
  EXPECT_EQ(j["eigenvalues"].size(), 8u);
  EXPECT_EQ(j["eigenvalues"][0].size(), 2u);
  EXPECT_TRUE(j.contains("off_support_multipliers"));
  EXPECT_TRUE(j.contains("sigma_values"));
}

TEST_F(CliTest, SpectralRefusesNonUnique) {
  EXPECT_EQ(run({"spectral", "--game", path("zero.json")}), 1);
  EXPECT_NE(err_.str().find("not certified unique"), std::string::npos);
}

TEST_F(CliTest, SweepDimCsvDeterministic) {
  const std::vector<std::string> base = {"sweep-dim", "--sizes", "3,5", "--eta", "0.05",
                                         "--trials", "2", "--seed", "7", "--no-wall-time", "--out"};
  auto a = base;
  a.push_back(path("a.csv"));
  auto b = base;
  b.push_back(path("b.csv"));
  ASSERT_EQ(run(a), 0) << err_.str();
  ASSERT_EQ(run(b), 0);
  const std::string ca = slurp(path("a.csv"));
  EXPECT_EQ(ca, slurp(path("b.csv")));
  EXPECT_EQ(ca.substr(0, ca.find('\n')),
            "point,trial,seed,iterations,converged,final_l1_error,wall_time_seconds");
  EXPECT_EQ(std::count(ca.begin(), ca.end(), '\n'), 5);
}

TEST_F(CliTest, SweepErrRejectsDuplicates) {
  EXPECT_EQ(run({"sweep-err", "--n", "4", "--errors", "0.5,0.5", "--out", path("e.csv")}), 1);
  EXPECT_NE(err_.str().find("duplicate"), std::string::npos);
}

TEST_F(CliTest, SweepErr) {
  ASSERT_EQ(run({"sweep-err", "--n", "4", "--errors", "0.5,0.25", "--eta", "0.05", "--trials", "2",
                 "--out", path("e.csv")}),
            0)
      << err_.str();
  const std::string c = slurp(path("e.csv"));
  EXPECT_EQ(std::count(c.begin(), c.end(), '\n'), 5);
}

TEST_F(CliTest, GenGameRoundTrip) {
  ASSERT_EQ(run({"gen-game", "--n", "3", "--m", "4", "--seed", "9", "--out", path("g.json")}), 0);
  const MatrixGame g = load_game(path("g.json"));
  EXPECT_EQ(g.rows(), 3);
  EXPECT_EQ(g.cols(), 4);
  EXPECT_EQ(g.payoffs(), gen_random_game(3, 4, 9).payoffs());
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_NE(run({}), 0);
  EXPECT_NE(run({"bogus"}), 0);
  EXPECT_NE(run({"exact"}), 0);
  EXPECT_EQ(run({"--help"}), 0);
  EXPECT_NE(out_.str().find("sweep-dim"), std::string::npos);
}

}  // namespace
}  // namespace omwu
