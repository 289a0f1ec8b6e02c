#include <gtest/gtest.h>

#include <set>

#include "mpe/oracles.hpp"
#include "mpe/simplicial.hpp"
#include "support.hpp"

using namespace mpe;
using mpe::testing::corpus_game;
using mpe::testing::grid;
using mpe::testing::pennies;
using mpe::testing::toy;

TEST(Grid, PointCounts) {
  EXPECT_EQ(grid_points(toy(), 2).size(), 3u);
  EXPECT_EQ(grid_points(toy(), 4).size(), 5u);
  EXPECT_EQ(grid_points(pennies(), 2).size(), 9u);
  EXPECT_EQ(grid_size(corpus_game("rock_paper_scissors.json"), 4), 225.0);
}

TEST(Grid, ToyPointsInLexOrder) {
  const auto pts = grid_points(toy(), 2);
  EXPECT_EQ(pts[0], grid(toy(), 2, {{{0, 2}}}));
  EXPECT_EQ(pts[1], grid(toy(), 2, {{{1, 1}}}));
  EXPECT_EQ(pts[2], grid(toy(), 2, {{{2, 0}}}));
}

TEST(Grid, EveryPointOnceAndOnTheGrid) {
  const auto g = corpus_game("dominant_two_state.json");
  const auto pts = grid_points(g, 3);
  std::set<std::vector<int>> seen;
  for (const auto& p : pts) {
    EXPECT_TRUE(on_grid(p));
    auto f = p.numerators.flat();
    seen.insert(std::vector<int>(f.begin(), f.end()));
  }
  EXPECT_EQ(seen.size(), pts.size());
  EXPECT_EQ(static_cast<double>(pts.size()), grid_size(g, 3));
}

TEST(Grid, RejectsZeroAndHugeGrids) {
  EXPECT_THROW(grid_points(toy(), 0), InvalidInput);
  Rng rng(1);
  const auto big = random_game(rng, {3, 3, 3}, 3, 0.5);
  EXPECT_THROW(grid_points(big, 8), TooLarge);
}

TEST(Grid, StartingPointNearestUniform) {
  EXPECT_EQ(starting_point(toy(), 2), grid(toy(), 2, {{{1, 1}}}));
  EXPECT_EQ(starting_point(toy(), 3), grid(toy(), 3, {{{1, 2}}}));
  const auto rps = corpus_game("rock_paper_scissors.json");
  EXPECT_EQ(starting_point(rps, 4), grid(rps, 4, {{{1, 1, 2}}, {{1, 1, 2}}}));
}

TEST(QMatrix, TwoActionBlock) {
  EXPECT_EQ(q_block(2), (std::vector<std::vector<int>>{{-1, 1}, {1, -1}}));
  EXPECT_EQ(q_block(3), (std::vector<std::vector<int>>{{-1, 0, 1}, {1, -1, 0}, {0, 1, -1}}));
}

TEST(QMatrix, ColumnsSumToZeroAndStayInBlock) {
  const auto g = corpus_game("rock_paper_scissors.json");
  const ProfileArray<int> shape(g.action_counts(), g.num_states(), 0);
  for (std::size_t k = 0; k < shape.size(); ++k) {
    const auto c = shape.coordinate(k);
    const auto col = q_column(g, c);
    int total = 0;
    for (int a = 0; a < g.num_actions(c.player); ++a) total += col(c.player, 0, a);
    EXPECT_EQ(total, 0);
    EXPECT_EQ(col[c], -1);
    for (int p = 0; p < g.num_players(); ++p) {
      if (p == c.player) continue;
      for (int v : col.row(p, 0)) EXPECT_EQ(v, 0);
    }
  }
}

TEST(QMatrix, ColumnKeepsRowSums) {
  const auto g = corpus_game("dominant_two_state.json");
  for (const auto& p : grid_points(g, 2)) {
    for (std::size_t k = 0; k < p.numerators.size(); ++k) {
      GridProfile moved = p;
      const auto col = q_column(g, p.numerators.coordinate(k));
      for (std::size_t c = 0; c < col.size(); ++c) moved.numerators.flat()[c] += col.flat()[c];
      for (int i = 0; i < g.num_players(); ++i) {
        for (int s = 0; s < g.num_states(); ++s) {
          int sum = 0;
          for (int v : moved.numerators.row(i, s)) sum += v;
          EXPECT_EQ(sum, 2);
        }
      }
    }
  }
}

TEST(Labels, ToyMidpointAndPurePoint) {
  EXPECT_EQ(label_point(toy(), grid(toy(), 2, {{{1, 1}}})), (Label{0, 0, 1}));
  EXPECT_EQ(label_point(toy(), grid(toy(), 2, {{{2, 0}}})), (Label{0, 0, 0}));
  EXPECT_EQ(label_point(toy(), grid(toy(), 2, {{{0, 2}}})), (Label{0, 0, 1}));
}

TEST(Labels, EquilibriumTakesLeastPositiveCoordinate) {
  const auto g = pennies();
  EXPECT_EQ(label_point(g, grid(g, 2, {{{1, 1}}, {{1, 1}}})), (Label{0, 0, 0}));
  const auto pd = corpus_game("prisoners_dilemma.json");
  EXPECT_EQ(label_point(pd, grid(pd, 1, {{{0, 1}}, {{0, 1}}})), (Label{0, 0, 1}));
}

TEST(Labels, AlwaysProper) {
  Rng rng(41);
  for (int k = 0; k < 20; ++k) {
    const auto g = random_desk_game(rng, 2, 2, 3);
    for (const auto& p : grid_points(g, 3)) {
      const Label l = label_point(g, p);
      EXPECT_GT(p.numerators[l], 0);
    }
  }
}

TEST(Labels, RejectsOffGridPoint) {
  EXPECT_THROW(label_point(toy(), grid(toy(), 2, {{{2, 1}}})), InvalidInput);
}

TEST(Simplex, EmptyIndexSetIsTheBase) {
  const GridSimplex s{grid(toy(), 2, {{{1, 1}}}), {}, {}};
  EXPECT_EQ(simplex_vertices(toy(), s), std::vector<GridProfile>{s.base});
  EXPECT_NE(classify_simplex(toy(), s).kind, SimplexKind::kStopping);
}

TEST(Simplex, EdgeFromMidpoint) {
  const GridSimplex s{grid(toy(), 2, {{{1, 1}}}), {{0, 0, 0}}, {0}};
  const auto vs = simplex_vertices(toy(), s);
  ASSERT_EQ(vs.size(), 2u);
  EXPECT_EQ(vs[1], grid(toy(), 2, {{{0, 2}}}));
  const GridSimplex bad{grid(toy(), 2, {{{0, 2}}}), {{0, 0, 0}}, {0}};
  EXPECT_THROW(simplex_vertices(toy(), bad), InvalidInput);
}

TEST(Simplex, Classification) {
  const auto g = toy();
  const auto both = classify_labels(g, {{0, 0, 0}, {0, 0, 1}});
  EXPECT_EQ(both.kind, SimplexKind::kStopping);
  EXPECT_EQ(both.player, 0);
  EXPECT_EQ(both.state, 0);
  EXPECT_EQ(classify_labels(g, {{0, 0, 1}, {0, 0, 1}}).kind, SimplexKind::kIncomplete);
  const auto pd = corpus_game("prisoners_dilemma.json");
  EXPECT_EQ(classify_labels(pd, {{0, 0, 1}, {1, 0, 0}}).kind, SimplexKind::kCompletelyLabelled);
}

TEST(Search, ToyStoppingSimplexAtEight) {
  const auto g = toy();
  const auto found = find_stopping_simplex(g, 8);
  ASSERT_TRUE(found.has_value());
  EXPECT_EQ(found->classification.kind, SimplexKind::kStopping);
  EXPECT_DOUBLE_EQ(stopping_residual_bound(g, 8), 18.5);
  const auto report = stopping_residual_check(g, found->simplex, 8);
  EXPECT_TRUE(report.pass);
  EXPECT_LT(report.max_residual, 0.2);
}

TEST(Search, PenniesStoppingSimplexTouchesUniform) {
  const auto g = pennies();
  for (int d : {2, 4, 8}) {
    const auto all = stopping_simplices(g, d);
    ASSERT_FALSE(all.empty()) << "d = " << d;
    const GridProfile centre = starting_point(g, d);
    bool adjacent = false;
    for (const auto& s : all) {
      for (const auto& v : simplex_vertices(g, s.simplex)) {
        int dist = 0;
        for (std::size_t k = 0; k < v.numerators.size(); ++k) {
          dist = std::max(dist, std::abs(v.numerators.flat()[k] - centre.numerators.flat()[k]));
        }
        adjacent = adjacent || dist <= 1;
      }
    }
    EXPECT_TRUE(adjacent) << "d = " << d;
  }
}

TEST(Search, FirstFoundIsFirstInFullList) {
  for (const char* name : {"matching_pennies.json", "coordination.json", "prisoners_dilemma.json"}) {
    const auto g = corpus_game(name);
    const auto first = find_stopping_simplex(g, 4);
    const auto all = stopping_simplices(g, 4);
    ASSERT_EQ(first.has_value(), !all.empty());
    if (first) EXPECT_EQ(first->simplex, all.front().simplex);
  }
}

TEST(Search, NotFoundIsNeverAFalsePositive) {
  Rng rng(42);
  for (int k = 0; k < 10; ++k) {
    const auto g = random_game(rng, {2, 2}, 1, 0.0);
    for (int d : {1, 2, 3}) {
      bool any = false;
      for_each_simplex(g, d, starting_point(g, d), [&](const GridSimplex& s, const std::vector<GridProfile>&) {
        any = any || classify_simplex(g, s).kind == SimplexKind::kStopping;
        return true;
      });
      EXPECT_EQ(find_stopping_simplex(g, d).has_value(), any);
    }
  }
}

TEST(Search, StoppingSimplicesRespectResidualBound) {
  for (const char* name : {"one_player_toy.json", "matching_pennies.json", "coordination.json"}) {
    const auto g = corpus_game(name);
    for (int d : {2, 4}) {
      for (const auto& s : stopping_simplices(g, d)) EXPECT_TRUE(stopping_residual_check(g, s.simplex, d).pass);
    }
  }
}

TEST(Search, ResidualCheckRejectsNonStopping) {
  const GridSimplex s{grid(toy(), 2, {{{1, 1}}}), {}, {}};
  EXPECT_THROW(stopping_residual_check(toy(), s, 2), InvalidInput);
}

TEST(Search, Deterministic) {
  const auto g = corpus_game("two_state_pennies.json");
  const auto a = find_stopping_simplex(g, 2);
  const auto b = find_stopping_simplex(g, 2);
  ASSERT_EQ(a.has_value(), b.has_value());
  if (a) EXPECT_EQ(a->simplex, b->simplex);
  for (const auto& p : grid_points(g, 2)) EXPECT_EQ(label_point(g, p), label_point(g, p));
}

TEST(Triangulation, RegionsAreCoveredByTheirSimplices) {
  const auto g = corpus_game("rock_paper_scissors.json");
  const int d = 3;
  const GridProfile v0 = starting_point(g, d);
  const std::vector<std::vector<Coordinate>> sets = {
      {{0, 0, 0}, {1, 0, 2}},
      {{0, 0, 0}, {0, 0, 1}, {1, 0, 1}},
      {{0, 0, 1}, {0, 0, 2}, {1, 0, 0}, {1, 0, 2}},
  };
  for (const auto& T : sets) {
    ASSERT_TRUE(is_admissible_index_set(g, T));
    std::set<std::vector<int>> covered;
    bool outside = false;
    for_each_simplex(g, d, v0, [&](const GridSimplex& s, const std::vector<GridProfile>& vs) {
      if (s.index_set != T) return true;
      for (const auto& v : vs) {
        outside = outside || !on_grid(v) || !in_region(g, v0, T, v);
        auto f = v.numerators.flat();
        covered.insert(std::vector<int>(f.begin(), f.end()));
      }
      return true;
    });
    EXPECT_FALSE(outside);
    std::size_t in_a = 0;
    for (const auto& x : grid_points(g, d)) {
      if (!in_region(g, v0, T, x)) continue;
      ++in_a;
      auto f = x.numerators.flat();
      EXPECT_TRUE(covered.contains(std::vector<int>(f.begin(), f.end())));
    }
    EXPECT_GT(in_a, 1u);
  }
}

TEST(Triangulation, InadmissibleSetsAreRejected) {
  const auto g = toy();
  const std::vector<Coordinate> full = {{0, 0, 0}, {0, 0, 1}};
  EXPECT_FALSE(is_admissible_index_set(g, full));
  EXPECT_FALSE(in_region(g, starting_point(g, 2), full, starting_point(g, 2)));
}

TEST(Triangulation, ConeCoefficientsReproducePoint) {
  const auto g = corpus_game("rock_paper_scissors.json");
  const GridProfile v0 = starting_point(g, 4);
  for (const auto& x : grid_points(g, 4)) {
    const auto c = cone_coefficients(v0, x);
    GridProfile rebuilt = v0;
    for (std::size_t k = 0; k < c.size(); ++k) {
      for (int t = 0; t < c.flat()[k]; ++t) mpe::detail::add_q_column(rebuilt.numerators, c.coordinate(k));
    }
    EXPECT_EQ(rebuilt.numerators, x.numerators);
    for (int p = 0; p < g.num_players(); ++p) {
      const auto row = c.row(p, 0);
      EXPECT_EQ(*std::min_element(row.begin(), row.end()), 0);
    }
  }
}
