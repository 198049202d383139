#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "omwu/game.hpp"
#include "test_util.hpp"

namespace omwu {
namespace {

using testing::fixture2x2;
using testing::pennies;
using testing::sp;

TEST(MatrixGame, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(MatrixGame(Eigen::MatrixXd(0, 2)), std::invalid_argument);
  Eigen::MatrixXd A = Eigen::MatrixXd::Ones(2, 2);
  A(1, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(MatrixGame{A}, std::invalid_argument);
  A(1, 0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(MatrixGame{A}, std::invalid_argument);
  EXPECT_THROW(MatrixGame::from_rows({{1, 2}, {3}}), std::invalid_argument);
}

TEST(MatrixGame, MaxAbsPayoff) {
  EXPECT_DOUBLE_EQ(MatrixGame::from_rows({{1, -4}, {2, 3}}).max_abs_payoff(), 4.0);
}

TEST(SimplexPoint, ValidatesSumAndSign) {
  EXPECT_NO_THROW(sp({0.25, 0.75}));
  EXPECT_THROW(sp({0.5, 0.6}), std::invalid_argument);
  EXPECT_THROW(sp({1.5, -0.5}), std::invalid_argument);
  EXPECT_THROW(SimplexPoint(Eigen::VectorXd(0)), std::invalid_argument);
}

TEST(SimplexPoint, NormalizedClampsTinyNegatives) {
  Eigen::VectorXd p(3);
  p << 0.5, 0.5 + 1e-12, -1e-12;
  const SimplexPoint q = SimplexPoint::normalized(p);
  EXPECT_EQ(q[2], 0.0);
  EXPECT_NEAR(q.values().sum(), 1.0, 1e-15);
  p << 0.5, 0.6, -0.1;
  EXPECT_THROW(SimplexPoint::normalized(p), std::invalid_argument);
}

TEST(SimplexPoint, SupportUsesTolerance) {
  Eigen::VectorXd p(4);
  p << 0.5, 1e-13, 0.5 - 1e-13, 0.0;
  const auto s = SimplexPoint(p).support();
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0], 0);
  EXPECT_EQ(s[1], 2);
}

TEST(Payoff, Examples) {
  EXPECT_DOUBLE_EQ(payoff(pennies(), sp({0.5, 0.5}), sp({0.5, 0.5})), 0.0);
  EXPECT_DOUBLE_EQ(payoff(fixture2x2(), sp({0.5, 0.5}), sp({0.25, 0.75})), 1.5);
  EXPECT_DOUBLE_EQ(payoff(fixture2x2(), sp({0.5, 0.5}), sp({0.5, 0.5})), 1.5);
}

TEST(Payoff, DimensionMismatchThrows) {
  EXPECT_THROW(payoff(fixture2x2(), sp({0.5, 0.5}), sp({0.2, 0.3, 0.5})), std::invalid_argument);
  EXPECT_THROW(epsilon_gap(fixture2x2(), sp({1.0}), sp({0.5, 0.5})), std::invalid_argument);
  EXPECT_THROW(alpha_closeness(fixture2x2(), sp({1.0}), sp({0.5, 0.5})), std::invalid_argument);
}

TEST(Payoff, Bilinear) {
  const MatrixGame g = gen_random_game(4, 5, 11);
  const SplitMix64 rng(5);
  for (int t = 0; t < 20; ++t) {
    const SimplexPoint x1(testing::interior(4, rng, 100 * t));
    const SimplexPoint x2(testing::interior(4, rng, 100 * t + 10));
    const SimplexPoint y(testing::interior(5, rng, 100 * t + 20));
    const double lam = rng.uniform01(100 * t + 30);
    const SimplexPoint mix(lam * x1.values() + (1 - lam) * x2.values());
    EXPECT_NEAR(payoff(g, mix, y), lam * payoff(g, x1, y) + (1 - lam) * payoff(g, x2, y), 1e-12);
  }
}

TEST(EpsilonGap, Examples) {
  EXPECT_NEAR(epsilon_gap(fixture2x2(), sp({0.5, 0.5}), sp({0.25, 0.75})), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(epsilon_gap(fixture2x2(), sp({0.5, 0.5}), sp({0.5, 0.5})), 0.5);
  EXPECT_DOUBLE_EQ(epsilon_gap(pennies(), sp({1, 0}), sp({1, 0})), 2.0);
}

TEST(AlphaCloseness, Examples) {
  EXPECT_NEAR(alpha_closeness(fixture2x2(), sp({0.5, 0.5}), sp({0.25, 0.75})), 0.0, 1e-15);
  const MatrixGame id = MatrixGame::from_rows({{1, 0}, {0, 1}});
  EXPECT_DOUBLE_EQ(alpha_closeness(id, sp({1, 0}), sp({1, 0})), 0.0);
  EXPECT_DOUBLE_EQ(alpha_closeness(fixture2x2(), sp({0.5, 0.5}), sp({0.5, 0.5})), 0.5);
}

TEST(Quality, PropertiesOnRandomPoints) {
  const SplitMix64 rng(17);
  for (int t = 0; t < 50; ++t) {
    const MatrixGame g = gen_random_game(3 + t % 4, 2 + t % 5, 1000 + t);
    const SimplexPoint x(testing::interior(g.rows(), rng, 64 * t));
    const SimplexPoint y(testing::interior(g.cols(), rng, 64 * t + 32));
    const QualityReport q = quality(g, x, y);
    EXPECT_GE(q.epsilon, 0.0);
    EXPECT_GE(q.alpha, 0.0);
    EXPECT_LE(q.alpha, q.epsilon + g.max_abs_payoff());
    // epsilon matches its defining formula
    const Eigen::VectorXd Ay = g.payoffs() * y.values();
    const Eigen::VectorXd Atx = g.payoffs().transpose() * x.values();
    const double v = x.values().dot(Ay);
    EXPECT_NEAR(q.epsilon, std::max(Ay.maxCoeff() - v, v - Atx.minCoeff()), 1e-14);
    EXPECT_NEAR(q.value, v, 1e-14);
  }
}

TEST(Quality, ZeroAlphaWithFullSupportMeansEquilibrium) {
  const MatrixGame g = fixture2x2();
  const SimplexPoint x = sp({0.5, 0.5});
  const SimplexPoint y = sp({0.25, 0.75});
  ASSERT_NEAR(alpha_closeness(g, x, y), 0.0, 1e-15);
  EXPECT_NEAR(epsilon_gap(g, x, y), 0.0, 1e-15);
}

TEST(GameJson, RoundTrip) {
  const MatrixGame g = gen_random_game(3, 4, 99);
  const MatrixGame h = parse_game_json(game_to_json(g));
  EXPECT_EQ(g.payoffs(), h.payoffs());
}

TEST(GameJson, RejectsMalformed) {
  EXPECT_THROW(parse_game_json("{\"B\": [[1]]}"), std::invalid_argument);
  EXPECT_THROW(parse_game_json("{\"A\": [[1, 2], [3]]}"), std::invalid_argument);
  EXPECT_THROW(parse_game_json("{\"A\": []}"), std::invalid_argument);
  EXPECT_THROW(parse_game_json("{\"A\": [[1, \"x\"]]}"), std::invalid_argument);
  EXPECT_THROW(parse_game_json("not json"), std::invalid_argument);
  EXPECT_THROW(load_game("/nonexistent/game.json"), std::runtime_error);
}

}  // namespace
}  // namespace omwu
