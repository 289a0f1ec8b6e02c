#include <gtest/gtest.h>

#include <cmath>

#include "mpe/game.hpp"
#include "mpe/oracles.hpp"
#include "support.hpp"

using namespace mpe;
using mpe::testing::normal_form;

namespace {

GameSpec single_action(double reward, double gamma) {
  GameSpec spec;
  spec.gamma = gamma;
  spec.states = {"s1"};
  spec.actions = {{"a1"}};
  spec.transitions = {{{1.0}}};
  spec.rewards = {{{reward}}};
  return spec;
}

GameSpec two_state_chain() {
  GameSpec spec;
  spec.gamma = 0.9;
  spec.states = {"s1", "s2"};
  spec.actions = {{"a1"}};
  spec.transitions = {{{0.3, 0.7}}, {{0.6, 0.4}}};
  spec.rewards = {{{1.0}, {0.25}}};
  return spec;
}

}  // namespace

TEST(ValidateGame, AcceptsSingleActionGame) {
  const StochasticGame g = validate_game(single_action(1.0, 0.9));
  EXPECT_EQ(g.num_players(), 1);
  EXPECT_DOUBLE_EQ(g.r_max(), 1.0);
}

TEST(ValidateGame, RejectsShortTransitionRow) {
  GameSpec spec = two_state_chain();
  spec.transitions[0][0] = {0.3, 0.6};
  EXPECT_THROW(validate_game(spec), InvalidInput);
}

TEST(ValidateGame, RejectsGammaOne) { EXPECT_THROW(validate_game(single_action(1.0, 1.0)), InvalidInput); }

TEST(ValidateGame, RejectsNegativeProbabilityAndReward) {
  GameSpec spec = two_state_chain();
  spec.transitions[1][0] = {1.2, -0.2};
  EXPECT_THROW(validate_game(spec), InvalidInput);
  EXPECT_THROW(validate_game(single_action(-0.5, 0.5)), InvalidInput);
}

TEST(ValidateGame, RejectsRewardAboveDeclaredBound) {
  GameSpec spec = single_action(2.0, 0.5);
  spec.r_max = 1.0;
  EXPECT_THROW(validate_game(spec), InvalidInput);
}

TEST(ValidateGame, ComputesMissingBound) {
  const StochasticGame g = validate_game(two_state_chain());
  EXPECT_DOUBLE_EQ(g.r_max(), 1.0);
}

TEST(Marginals, IdentityPatternUnderUniformIsHalf) {
  const auto g = normal_form({2, 2}, {{1, 0, 0, 1}, {0, 1, 1, 0}});
  EXPECT_NEAR(marginal_reward(g, uniform_profile(g), 0)(0), 0.5, 1e-15);
}

TEST(Marginals, PureProfileReadsTheTable) {
  Rng rng(7);
  const auto g = random_game(rng, {2, 3}, 2, 0.5);
  const auto pi = pure_profile(g, {{1, 0}, {2, 1}});
  const int j0 = g.joint_index(std::vector<int>{1, 2});
  const int j1 = g.joint_index(std::vector<int>{0, 1});
  EXPECT_EQ(marginal_reward(g, pi, 1)(0), g.reward(1, 0, j0));
  EXPECT_EQ(marginal_reward(g, pi, 0)(1), g.reward(0, 1, j1));
  const auto P = marginal_transition(g, pi);
  for (int t = 0; t < 2; ++t) {
    EXPECT_EQ(P(0, t), g.transition(0, j0, t));
    EXPECT_EQ(P(1, t), g.transition(1, j1, t));
  }
}

TEST(Marginals, SelfLoopsGiveIdentity) {
  GameSpec spec;
  spec.gamma = 0.5;
  spec.states = {"s1", "s2", "s3"};
  spec.actions = {{"a1", "a2"}};
  spec.transitions = {{{1, 0, 0}, {1, 0, 0}}, {{0, 1, 0}, {0, 1, 0}}, {{0, 0, 1}, {0, 0, 1}}};
  spec.rewards = {{{0, 1}, {0, 1}, {0, 1}}};
  const auto g = validate_game(spec);
  EXPECT_TRUE(marginal_transition(g, uniform_profile(g)).isIdentity(0.0));
}

TEST(Marginals, ThreePlayerGamesMatchEnumeration) {
  Rng rng(11);
  for (int k = 0; k < 50; ++k) {
    const auto g = random_game(rng, {2, 2, 2}, 1 + k % 3, kGammaChoices[k % 3]);
    const auto pi = random_profile(rng, g);
    const Marginals m = marginals(g, pi);
    for (int p = 0; p < 3; ++p) {
      const auto ref = enumerate_joint_expectation(g, pi, p);
      EXPECT_LE((m.reward.row(p).transpose() - ref.reward).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LE((m.transition - ref.transition).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(Marginals, RowsAreStochastic) {
  Rng rng(12);
  for (int k = 0; k < 100; ++k) {
    const auto g = random_desk_game(rng);
    const auto P = marginal_transition(g, random_profile(rng, g));
    EXPECT_GE(P.minCoeff(), 0.0);
    EXPECT_LE((P.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-10);
  }
}

TEST(Marginals, RejectsShapeMismatch) {
  const auto g = normal_form({2, 2}, {{1, 0, 0, 1}, {0, 1, 1, 0}});
  const auto other = normal_form({3}, {{1, 0, 0}});
  EXPECT_THROW(marginals(g, uniform_profile(other)), InvalidInput);
}

TEST(ValueFunction, GeometricSeries) {
  const auto g = validate_game(single_action(1.0, 0.9));
  EXPECT_NEAR(value_function(g, uniform_profile(g), 0)(0), 10.0, 1e-12);
}

TEST(ValueFunction, NoDiscountIsImmediateReward) {
  Rng rng(3);
  const auto g = random_game(rng, {2, 2}, 3, 0.0);
  const auto pi = random_profile(rng, g);
  for (int p = 0; p < 2; ++p) {
    EXPECT_LE((value_function(g, pi, p) - marginal_reward(g, pi, p)).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(ValueFunction, ChainMatchesLongTruncation) {
  const auto g = validate_game(two_state_chain());
  const auto pi = uniform_profile(g);
  const ValueVector exact = value_function(g, pi, 0);
  const ValueVector approx = truncated_value(g, pi, 0, 10'000);
  EXPECT_LE((exact - approx).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(ValueFunction, BoundedByDiscountedMaximum) {
  Rng rng(4);
  for (int k = 0; k < 100; ++k) {
    const auto g = random_desk_game(rng);
    const auto V = all_value_functions(g, random_profile(rng, g));
    EXPECT_GE(V.minCoeff(), -1e-12);
    EXPECT_LE(V.maxCoeff(), g.r_max() / (1.0 - g.gamma()) + 1e-12);
  }
}

TEST(DeviationValue, PureActionAlreadyPlayed) {
  Rng rng(5);
  const auto g = random_game(rng, {2, 2}, 2, 0.9);
  const auto pi = pure_profile(g, {{1, 0}, {0, 1}});
  const auto V = value_function(g, pi, 0);
  EXPECT_NEAR(deviation_value(g, pi, 0, 0, 1), V(0), 1e-12);
  EXPECT_NEAR(deviation_value(g, pi, 0, 1, 0), V(1), 1e-12);
}

TEST(DeviationValue, ToyDeviationToFirstAction) {
  const auto g = mpe::testing::toy();
  EXPECT_DOUBLE_EQ(deviation_value(g, uniform_profile(g), 0, 0, 0), 1.0);
  EXPECT_DOUBLE_EQ(deviation_value(g, uniform_profile(g), 0, 0, 1), 0.0);
}

TEST(DeviationValue, MatchesExplicitlyModifiedProfile) {
  Rng rng(6);
  for (int k = 0; k < 50; ++k) {
    const auto g = random_desk_game(rng);
    const auto pi = random_profile(rng, g);
    const int p = rng.below(g.num_players());
    const int s = rng.below(g.num_states());
    const int a = rng.below(g.num_actions(p));
    StrategyProfile modified = pi;
    auto row = modified.row(p, s);
    std::ranges::fill(row, 0.0);
    row[static_cast<std::size_t>(a)] = 1.0;
    EXPECT_NEAR(deviation_value(g, pi, p, s, a), value_function(g, modified, p)(s), 1e-10);
  }
}

TEST(DeviationValue, RejectsOutOfRangeIndex) {
  const auto g = mpe::testing::toy();
  EXPECT_THROW(deviation_value(g, uniform_profile(g), 0, 0, 2), InvalidInput);
  EXPECT_THROW(deviation_value(g, uniform_profile(g), 1, 0, 0), InvalidInput);
}

TEST(Resolvent, BellmanResidualRowSumsAndEntries) {
  Rng rng(8);
  for (int k = 0; k < 200; ++k) {
    const auto g = random_desk_game(rng);
    const auto pi = random_profile(rng, g);
    const Marginals m = marginals(g, pi);
    const auto I = Eigen::MatrixXd::Identity(g.num_states(), g.num_states());
    for (int p = 0; p < g.num_players(); ++p) {
      const auto V = value_function(g, pi, p);
      const Eigen::VectorXd back = (I - g.gamma() * m.transition) * V;
      EXPECT_LE((back - m.reward.row(p).transpose()).cwiseAbs().maxCoeff(), 1e-9);
    }
    const auto Q = resolvent(g, pi);
    const double expect = 1.0 / (1.0 - g.gamma());
    EXPECT_LE((Q.rowwise().sum().array() - expect).abs().maxCoeff(), 1e-9);
    EXPECT_GE(Q.minCoeff(), -1e-12);
    EXPECT_LE(Q.maxCoeff(), expect + 1e-12);
  }
}

TEST(Perturbation, RewardAndResolventBounds) {
  Rng rng(9);
  for (int k = 0; k < 200; ++k) {
    const auto g = random_desk_game(rng);
    const auto a = random_profile(rng, g);
    const auto b = random_profile(rng, g);
    const double delta = max_abs_diff(a, b);
    const double n = g.num_players();
    const double A = g.max_actions();
    const double slack = 1.0 - g.gamma();
    const double reward_gap = (marginals(g, a).reward - marginals(g, b).reward).cwiseAbs().maxCoeff();
    EXPECT_LE(reward_gap, n * A * g.r_max() * delta + 1e-12);
    const double inverse_gap = (resolvent(g, a) - resolvent(g, b)).cwiseAbs().maxCoeff();
    EXPECT_LE(inverse_gap, n * g.num_states() * A * delta / (slack * slack) + 1e-12);
  }
}

TEST(Profile, ValidationRejectsBadRows) {
  const auto g = mpe::testing::pennies();
  auto pi = uniform_profile(g);
  pi(1, 0, 0) = 0.49;
  EXPECT_THROW(validate_profile(g, pi), InvalidInput);
  pi(1, 0, 0) = -0.1;
  pi(1, 0, 1) = 1.1;
  EXPECT_THROW(validate_profile(g, pi), InvalidInput);
}
