#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "mpe/certify.hpp"
#include "mpe/game.hpp"
#include "mpe/nash_map.hpp"
#include "mpe/parallel.hpp"
#include "mpe/simplicial.hpp"

namespace mpe {

// --- deterministic random instances -------------------------------------------

/// mt19937_64 with a hand-rolled uniform so draws are identical on every
/// standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double positive() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }
  int below(int n) { return static_cast<int>(engine_() % static_cast<std::uint64_t>(n)); }

 private:
  std::mt19937_64 engine_;
};

inline constexpr double kGammaChoices[] = {0.0, 0.5, 0.9};

/// Rewards uniform on [0, 1]; each transition row is a normalized vector of
/// uniform positives.
inline StochasticGame random_game(Rng& rng, const std::vector<int>& action_counts, int num_states,
                                  double gamma) {
  GameSpec spec;
  spec.gamma = gamma;
  for (int s = 0; s < num_states; ++s) spec.states.push_back("s" + std::to_string(s + 1));
  int joint = 1;
  for (std::size_t p = 0; p < action_counts.size(); ++p) {
    std::vector<std::string> names;
    for (int a = 0; a < action_counts[p]; ++a) names.push_back("a" + std::to_string(a + 1));
    spec.actions.push_back(std::move(names));
    joint *= action_counts[p];
  }
  spec.transitions.assign(static_cast<std::size_t>(num_states), {});
  for (auto& per_state : spec.transitions) {
    for (int j = 0; j < joint; ++j) {
      std::vector<double> row(static_cast<std::size_t>(num_states));
      double total = 0.0;
      for (auto& x : row) total += (x = rng.positive());
      for (auto& x : row) x /= total;
      per_state.push_back(std::move(row));
    }
  }
  spec.rewards.assign(action_counts.size(),
                      std::vector<std::vector<double>>(static_cast<std::size_t>(num_states)));
  for (auto& per_player : spec.rewards) {
    for (auto& per_state : per_player) {
      for (int j = 0; j < joint; ++j) per_state.push_back(rng.uniform());
    }
  }
  spec.r_max = 1.0;
  return validate_game(std::move(spec));
}

/// Desk-scale game with random shape: n, S, A^i in [1, max] (n >= 1), gamma
/// drawn from {0, 0.5, 0.9}.
inline StochasticGame random_desk_game(Rng& rng, int max_players = 3, int max_states = 3,
                                       int max_actions = 3) {
  const int n = 1 + rng.below(max_players);
  const int S = 1 + rng.below(max_states);
  std::vector<int> counts;
  for (int p = 0; p < n; ++p) counts.push_back(2 + rng.below(std::max(1, max_actions - 1)));
  const double gamma = kGammaChoices[rng.below(3)];
  return random_game(rng, counts, S, gamma);
}

/// Uniformly distributed over the product of simplices.
inline StrategyProfile random_profile(Rng& rng, const StochasticGame& game) {
  StrategyProfile pi = make_profile(game);
  for (int p = 0; p < game.num_players(); ++p) {
    for (int s = 0; s < game.num_states(); ++s) {
      auto row = pi.row(p, s);
      double total = 0.0;
      for (auto& x : row) total += (x = -std::log(rng.positive()));
      for (auto& x : row) x /= total;
    }
  }
  return pi;
}

// --- brute-force references ---------------------------------------------------

struct JointExpectation {
  Eigen::VectorXd reward;      // r^{i,pi}(s)
  Eigen::MatrixXd transition;  // P^pi
};

/// r^{i,pi} and P^pi by an explicit sum over every joint action.
inline JointExpectation enumerate_joint_expectation(const StochasticGame& game,
                                                    const StrategyProfile& pi, int player) {
  detail::require_shape(game, pi);
  detail::require(player >= 0 && player < game.num_players(), "player index out of range");
  const int S = game.num_states();
  JointExpectation out{Eigen::VectorXd::Zero(S), Eigen::MatrixXd::Zero(S, S)};
  for (int s = 0; s < S; ++s) {
    for (int j = 0; j < game.num_joint_actions(); ++j) {
      const auto actions = game.joint_actions(j);
      double prob = 1.0;
      for (int p = 0; p < game.num_players(); ++p) prob *= pi(p, s, actions[static_cast<std::size_t>(p)]);
      out.reward(s) += prob * game.reward(player, s, j);
      for (int t = 0; t < S; ++t) out.transition(s, t) += prob * game.transition(s, j, t);
    }
  }
  return out;
}

/// sum_{t < horizon} gamma^t (P^pi)^t r^{i,pi}.
inline ValueVector truncated_value(const StochasticGame& game, const StrategyProfile& pi,
                                   int player, int horizon) {
  detail::require(horizon >= 1, "horizon must be >= 1");
  const JointExpectation m = enumerate_joint_expectation(game, pi, player);
  ValueVector total = Eigen::VectorXd::Zero(game.num_states());
  Eigen::VectorXd term = m.reward;
  for (int t = 0; t < horizon; ++t) {
    total += term;
    term = game.gamma() * (m.transition * term);
  }
  return total;
}

/// Entrywise max of V over all deterministic stationary policies of `player`,
/// each evaluated exactly, with the other players frozen at pi.
inline ValueVector enumerate_deterministic_policies(const StochasticGame& game,
                                                    const StrategyProfile& pi, int player) {
  detail::require_shape(game, pi);
  detail::require(player >= 0 && player < game.num_players(), "player index out of range");
  const int S = game.num_states();
  const int A = game.num_actions(player);
  if (std::pow(static_cast<double>(A), S) > 1e5) throw TooLarge("too many deterministic policies");
  std::vector<int> policy(static_cast<std::size_t>(S), 0);
  ValueVector best = ValueVector::Constant(S, -std::numeric_limits<double>::infinity());
  StrategyProfile committed = pi;
  while (true) {
    for (int s = 0; s < S; ++s) {
      auto row = committed.row(player, s);
      std::ranges::fill(row, 0.0);
      row[static_cast<std::size_t>(policy[static_cast<std::size_t>(s)])] = 1.0;
    }
    best = best.cwiseMax(value_function(game, committed, player));
    int s = S - 1;
    for (; s >= 0; --s) {
      if (++policy[static_cast<std::size_t>(s)] < A) break;
      policy[static_cast<std::size_t>(s)] = 0;
    }
    if (s < 0) break;
  }
  return best;
}

struct SupportEnumeration {
  std::vector<StrategyProfile> equilibria;
  bool degenerate = false;  // only pure checks were reliable
};

/// Nash equilibria of a 2x2 bimatrix game (n = 2, S = 1, gamma = 0): pure
/// profiles with no profitable deviation, plus the fully mixed solution of the
/// indifference equations when it is interior.
inline SupportEnumeration support_enumeration_2x2(const StochasticGame& game) {
  detail::require(game.num_players() == 2 && game.num_states() == 1 && game.gamma() == 0.0 &&
                      game.num_actions(0) == 2 && game.num_actions(1) == 2,
                  "support enumeration needs a 2x2 single-state game with gamma = 0");
  auto u = [&](int player, int a, int b) { return game.reward(player, 0, a * 2 + b); };
  SupportEnumeration out;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      if (u(0, a, b) >= u(0, 1 - a, b) && u(1, a, b) >= u(1, a, 1 - b)) {
        out.equilibria.push_back(pure_profile(game, {{a}, {b}}));
      }
    }
  }
  constexpr double kFlat = 1e-12;
  // p: row player's weight on action 0 that leaves the column player indifferent.
  const double den_col = u(1, 0, 0) - u(1, 0, 1) - u(1, 1, 0) + u(1, 1, 1);
  const double den_row = u(0, 0, 0) - u(0, 0, 1) - u(0, 1, 0) + u(0, 1, 1);
  if (std::abs(den_col) < kFlat || std::abs(den_row) < kFlat) {
    out.degenerate = true;
    return out;
  }
  const double p = (u(1, 1, 1) - u(1, 1, 0)) / den_col;
  const double q = (u(0, 1, 1) - u(0, 0, 1)) / den_row;
  auto interior = [](double x) { return x > kFlat && x < 1.0 - kFlat; };
  auto boundary = [](double x) { return std::abs(x) <= kFlat || std::abs(1.0 - x) <= kFlat; };
  if (boundary(p) || boundary(q)) out.degenerate = true;
  if (interior(p) && interior(q)) {
    StrategyProfile mixed = make_profile(game);
    mixed(0, 0, 0) = p;
    mixed(0, 0, 1) = 1.0 - p;
    mixed(1, 0, 0) = q;
    mixed(1, 0, 1) = 1.0 - q;
    out.equilibria.push_back(std::move(mixed));
  }
  return out;
}

struct LipschitzProbe {
  double max_ratio = 0.0;
  int pairs = 0;  // pairs actually evaluated (identical pairs are skipped)
};

/// Largest ||f(pi1) - f(pi2)|| / ||pi1 - pi2|| over random pairs. Even samples
/// pair two independent profiles; odd samples pull the second profile toward
/// the first by a factor in [1e-6, 1] to probe the local slope.
inline LipschitzProbe finite_difference_lipschitz(const StochasticGame& game, int samples,
                                                  std::uint64_t seed) {
  detail::require(samples >= 1, "samples must be >= 1");
  Rng rng(seed);
  LipschitzProbe probe;
  for (int k = 0; k < samples; ++k) {
    const StrategyProfile a = random_profile(rng, game);
    StrategyProfile b = random_profile(rng, game);
    if (k % 2 == 1) {
      const double t = std::pow(10.0, -6.0 * rng.uniform());
      auto fa = a.flat();
      auto fb = b.flat();
      for (std::size_t c = 0; c < fb.size(); ++c) fb[c] = (1.0 - t) * fa[c] + t * fb[c];
    }
    const double dist = max_abs_diff(a, b);
    if (dist == 0.0) continue;
    const double moved = max_abs_diff(apply_f(game, a), apply_f(game, b));
    probe.max_ratio = std::max(probe.max_ratio, moved / dist);
    ++probe.pairs;
  }
  return probe;
}

struct GridArgmin {
  GridProfile point;
  double residual = 0.0;
};

/// Grid point with the smallest residual; ties go to the lexicographically least.
inline GridArgmin grid_residual_argmin(const StochasticGame& game, int d) {
  const auto points = grid_points(game, d);
  std::vector<double> residuals(points.size());
  parallel_for(points.size(),
               [&](std::size_t k) { residuals[k] = residual(game, points[k].to_profile()); });
  std::size_t best = 0;
  for (std::size_t k = 1; k < points.size(); ++k) {
    if (residuals[k] < residuals[best]) best = k;
  }
  return {points[best], residuals[best]};
}

// --- zero-sum reference -----------------------------------------------------------

/// Value of a zero-sum 2x2 matrix game for the maximizing row player.
inline double matrix_game_value_2x2(double m00, double m01, double m10, double m11) {
  const double lower = std::max(std::min(m00, m01), std::min(m10, m11));
  const double upper = std::min(std::max(m00, m10), std::max(m01, m11));
  if (lower >= upper) return lower;
  return (m00 * m11 - m01 * m10) / (m00 + m11 - m01 - m10);
}

/// Shapley value iteration for player 0 in a two-player 2x2-action game whose
/// rewards sum to a constant at every state and joint action.
inline ValueVector minimax_value_iteration(const StochasticGame& game, double tol = 1e-14,
                                           int max_iters = 1'000'000) {
  detail::require(game.num_players() == 2 && game.num_actions(0) == 2 && game.num_actions(1) == 2,
                  "minimax value iteration needs two players with two actions each");
  const int S = game.num_states();
  ValueVector v = ValueVector::Zero(S);
  for (int it = 0; it < max_iters; ++it) {
    ValueVector next(S);
    for (int s = 0; s < S; ++s) {
      double m[4];
      for (int j = 0; j < 4; ++j) {
        double cont = 0.0;
        for (int t = 0; t < S; ++t) cont += game.transition(s, j, t) * v(t);
        m[j] = game.reward(0, s, j) + game.gamma() * cont;
      }
      next(s) = matrix_game_value_2x2(m[0], m[1], m[2], m[3]);
    }
    const double change = (next - v).cwiseAbs().maxCoeff();
    v = next;
    if (change <= tol) break;
  }
  return v;
}

}  // namespace mpe
