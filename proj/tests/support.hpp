#pragma once

#include <string>
#include <vector>

#include "mpe/io.hpp"
#include "mpe/oracles.hpp"

namespace mpe::testing {

inline std::string corpus_path(const std::string& name) { return std::string(MPE_CORPUS_DIR) + "/" + name; }

inline StochasticGame corpus_game(const std::string& name) { return io::load_game(corpus_path(name)); }

inline io::Json manifest() { return io::parse_file(corpus_path("manifest.json")); }

/// One state, gamma 0, one reward vector per player over joint actions.
inline StochasticGame normal_form(const std::vector<int>& counts, const std::vector<std::vector<double>>& rewards,
                                  double gamma = 0.0) {
  GameSpec spec;
  spec.gamma = gamma;
  spec.states = {"s1"};
  int joint = 1;
  for (int c : counts) {
    std::vector<std::string> names;
    for (int a = 0; a < c; ++a) names.push_back("a" + std::to_string(a + 1));
    spec.actions.push_back(names);
    joint *= c;
  }
  spec.transitions = {std::vector<std::vector<double>>(static_cast<std::size_t>(joint), {1.0})};
  for (const auto& r : rewards) spec.rewards.push_back({r});
  return validate_game(spec);
}

inline StochasticGame toy() { return normal_form({2}, {{1.0, 0.0}}); }

inline StochasticGame pennies() { return normal_form({2, 2}, {{1, 0, 0, 1}, {0, 1, 1, 0}}); }

inline StrategyProfile row_profile(const StochasticGame& game, const std::vector<std::vector<std::vector<double>>>& rows) {
  StrategyProfile pi = make_profile(game);
  for (int p = 0; p < game.num_players(); ++p) {
    for (int s = 0; s < game.num_states(); ++s) {
      for (int a = 0; a < game.num_actions(p); ++a) pi(p, s, a) = rows[p][s][a];
    }
  }
  return pi;
}

inline GridProfile grid(const StochasticGame& game, int d, const std::vector<std::vector<std::vector<int>>>& rows) {
  GridProfile g{d, ProfileArray<int>(game.action_counts(), game.num_states(), 0)};
  for (int p = 0; p < game.num_players(); ++p) {
    for (int s = 0; s < game.num_states(); ++s) {
      for (int a = 0; a < game.num_actions(p); ++a) g.numerators(p, s, a) = rows[p][s][a];
    }
  }
  return g;
}

}  // namespace mpe::testing
