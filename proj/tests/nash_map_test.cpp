#include <gtest/gtest.h>

#include "mpe/nash_map.hpp"
#include "mpe/oracles.hpp"
#include "support.hpp"

using namespace mpe;
using mpe::testing::corpus_game;
using mpe::testing::toy;

TEST(GainTable, ToyHalfHalf) {
  const auto g = toy();
  const auto t = gain_table(g, uniform_profile(g));
  EXPECT_DOUBLE_EQ(t.gains(0, 0, 0), 0.5);
  EXPECT_DOUBLE_EQ(t.gains(0, 0, 1), 0.0);
}

TEST(GainTable, ZeroAtDominantEquilibrium) {
  const auto g = corpus_game("prisoners_dilemma.json");
  EXPECT_TRUE(gain_table(g, pure_profile(g, {{1}, {1}})).all_zero());
  EXPECT_FALSE(gain_table(g, pure_profile(g, {{0}, {1}})).all_zero());
}

TEST(GainTable, ZeroForPenniesUniform) {
  const auto g = mpe::testing::pennies();
  EXPECT_TRUE(gain_table(g, uniform_profile(g)).all_zero());
}

TEST(ApplyF, ToyHalfHalf) {
  const auto g = toy();
  const auto out = apply_f(g, uniform_profile(g));
  EXPECT_NEAR(out(0, 0, 0), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(out(0, 0, 1), 1.0 / 3.0, 1e-15);
}

TEST(ApplyF, LeavesEquilibriumUnchanged) {
  const auto g = corpus_game("dominant_two_state.json");
  const auto pi = pure_profile(g, {{0, 1}, {0, 1}});
  EXPECT_EQ(apply_f(g, pi), pi);
}

TEST(ApplyF, PreservesSimplices) {
  Rng rng(21);
  for (int k = 0; k < 1000; ++k) {
    const auto g = random_desk_game(rng);
    const auto out = apply_f(g, random_profile(rng, g));
    EXPECT_NO_THROW(validate_profile(g, out, 1e-12));
  }
}

TEST(Residual, ToyIsOneSixth) { EXPECT_NEAR(residual(toy(), uniform_profile(toy())), 1.0 / 6.0, 1e-15); }

TEST(Residual, ZeroAtEquilibrium) {
  const auto g = corpus_game("rock_paper_scissors.json");
  EXPECT_LE(residual(g, uniform_profile(g)), 1e-12);
}

TEST(Residual, NeverExceedsOne) {
  Rng rng(22);
  for (int k = 0; k < 200; ++k) {
    const auto g = random_desk_game(rng);
    EXPECT_LE(residual(g, random_profile(rng, g)), 1.0);
  }
}

TEST(Residual, FixedPointIffZeroGains) {
  Rng rng(23);
  int fixed = 0;
  auto check = [&](const StochasticGame& g, const StrategyProfile& pi) {
    const bool small = residual(g, pi) <= 1e-10;
    const bool flat = gain_table(g, pi).max() <= 1e-8;
    EXPECT_EQ(small, flat);
    fixed += small;
  };
  for (int k = 0; k < 200; ++k) {
    const auto g = random_desk_game(rng);
    check(g, random_profile(rng, g));
    for (const auto& p : grid_points(g, 1)) check(g, p.to_profile());
  }
  for (const char* name : {"matching_pennies.json", "coordination.json", "two_state_pennies.json"}) {
    const auto g = corpus_game(name);
    for (const auto& p : grid_points(g, 2)) check(g, p.to_profile());
  }
  EXPECT_GT(fixed, 0);
}

TEST(Lipschitz, Formula) {
  EXPECT_DOUBLE_EQ(lipschitz_constant(corpus_game("lambda_example.json")), 1152.0);
  EXPECT_DOUBLE_EQ(lipschitz_constant(toy()), 36.0);
  const auto doubled = mpe::testing::normal_form({2}, {{2.0, 0.0}});
  EXPECT_DOUBLE_EQ(lipschitz_constant(doubled), 72.0);
}

TEST(Lipschitz, EmpiricalRatioStaysBelowConstant) {
  Rng rng(24);
  for (int k = 0; k < 5; ++k) {
    const auto g = random_desk_game(rng);
    const auto probe = finite_difference_lipschitz(g, 1000, 100 + k);
    EXPECT_LE(probe.max_ratio, lipschitz_constant(g));
  }
}
