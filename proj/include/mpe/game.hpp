#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mpe/error.hpp"
#include "mpe/profile.hpp"

namespace mpe {

/// Per-state expected discounted return of one player.
using ValueVector = Eigen::VectorXd;

inline constexpr double kInputProbabilityTol = 1e-12;
inline constexpr double kArithmeticProbabilityTol = 1e-10;

/// Unvalidated game description, as read from a file or built by a generator.
/// Joint actions are indexed row-major over players: player 0 is the most
/// significant digit.
struct GameSpec {
  double gamma = 0.0;
  std::vector<std::string> states;
  std::vector<std::vector<std::string>> actions;              // [player][action]
  std::vector<std::vector<std::vector<double>>> transitions;  // [state][joint][next]
  std::vector<std::vector<std::vector<double>>> rewards;      // [player][state][joint]
  std::optional<double> r_max;
};

class StochasticGame;
StochasticGame validate_game(GameSpec spec);

/// A finite discounted stochastic game <n, S, A, P, r, gamma>. Instances only
/// come out of validate_game, so every accessor can assume the invariants.
class StochasticGame {
 public:
  int num_players() const { return static_cast<int>(counts_.size()); }
  int num_states() const { return static_cast<int>(state_names_.size()); }
  int num_actions(int player) const { return counts_[static_cast<std::size_t>(player)]; }
  int max_actions() const { return *std::max_element(counts_.begin(), counts_.end()); }
  int num_joint_actions() const { return num_joint_; }
  const std::vector<int>& action_counts() const { return counts_; }
  double gamma() const { return gamma_; }
  double r_max() const { return r_max_; }

  const std::vector<std::string>& state_names() const { return state_names_; }
  const std::vector<std::string>& action_names(int player) const {
    return action_names_[static_cast<std::size_t>(player)];
  }

  std::span<const double> transition_row(int state, int joint) const {
    const auto s = static_cast<std::size_t>(num_states());
    return {transitions_.data() + (static_cast<std::size_t>(state) * num_joint_ + joint) * s, s};
  }
  double transition(int state, int joint, int next) const {
    return transition_row(state, joint)[static_cast<std::size_t>(next)];
  }
  double reward(int player, int state, int joint) const {
    return rewards_[(static_cast<std::size_t>(player) * num_states() + state) * num_joint_ + joint];
  }

  int joint_index(std::span<const int> actions) const {
    detail::require(static_cast<int>(actions.size()) == num_players(), "joint action arity");
    int joint = 0;
    for (int p = 0; p < num_players(); ++p) {
      const int a = actions[static_cast<std::size_t>(p)];
      detail::require(a >= 0 && a < num_actions(p), "action index out of range");
      joint = joint * num_actions(p) + a;
    }
    return joint;
  }

  std::vector<int> joint_actions(int joint) const {
    std::vector<int> actions(counts_.size());
    for (int p = num_players() - 1; p >= 0; --p) {
      actions[static_cast<std::size_t>(p)] = joint % num_actions(p);
      joint /= num_actions(p);
    }
    return actions;
  }

  /// Back to the raw description (used for serialization).
  GameSpec spec() const;

 private:
  friend StochasticGame validate_game(GameSpec spec);
  StochasticGame() = default;

  std::vector<int> counts_;
  std::vector<std::string> state_names_;
  std::vector<std::vector<std::string>> action_names_;
  std::vector<double> transitions_;
  std::vector<double> rewards_;
  double gamma_ = 0.0;
  double r_max_ = 0.0;
  int num_joint_ = 1;
};

namespace detail {

inline std::string at(const std::string& field, std::initializer_list<std::size_t> idx) {
  std::string out = field;
  for (auto i : idx) out += "[" + std::to_string(i) + "]";
  return out;
}

inline void check_distribution(std::span<const double> probs, double tol, const std::string& where) {
  double sum = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    const double p = probs[k];
    require(std::isfinite(p), where + ": probability is not finite");
    require(p >= 0.0, where + ": negative probability " + std::to_string(p));
    sum += p;
  }
  require(std::abs(sum - 1.0) <= tol, where + ": probabilities sum to " + std::to_string(sum));
}

}  // namespace detail

/// Checks every structural and numerical constraint of the game tuple and
/// returns the immutable game. Throws InvalidInput naming the first violation.
inline StochasticGame validate_game(GameSpec spec) {
  using detail::at;
  using detail::require;
  require(std::isfinite(spec.gamma) && spec.gamma >= 0.0, "gamma must be a finite number >= 0");
  require(spec.gamma < 1.0, "gamma must be < 1 (got " + std::to_string(spec.gamma) + ")");
  require(!spec.states.empty(), "states: at least one state required");
  require(!spec.actions.empty(), "players: at least one player required");

  StochasticGame g;
  g.gamma_ = spec.gamma;
  g.state_names_ = std::move(spec.states);
  g.action_names_ = std::move(spec.actions);
  long long joint = 1;
  for (std::size_t p = 0; p < g.action_names_.size(); ++p) {
    const auto count = g.action_names_[p].size();
    require(count >= 1, at("players", {p}) + ": at least one action required");
    g.counts_.push_back(static_cast<int>(count));
    joint *= static_cast<long long>(count);
    require(joint <= 1'000'000, "joint action space too large");
  }
  g.num_joint_ = static_cast<int>(joint);

  const std::size_t S = g.state_names_.size();
  const auto J = static_cast<std::size_t>(g.num_joint_);
  const std::size_t n = g.counts_.size();

  require(spec.transitions.size() == S, "transitions: expected one entry per state (" +
                                            std::to_string(S) + "), got " +
                                            std::to_string(spec.transitions.size()));
  g.transitions_.reserve(S * J * S);
  for (std::size_t s = 0; s < S; ++s) {
    require(spec.transitions[s].size() == J, at("transitions", {s}) + ": expected " +
                                                 std::to_string(J) + " joint actions, got " +
                                                 std::to_string(spec.transitions[s].size()));
    for (std::size_t j = 0; j < J; ++j) {
      const auto& row = spec.transitions[s][j];
      require(row.size() == S, at("transitions", {s, j}) + ": expected " + std::to_string(S) +
                                   " next-state probabilities");
      detail::check_distribution(row, kInputProbabilityTol, at("transitions", {s, j}));
      g.transitions_.insert(g.transitions_.end(), row.begin(), row.end());
    }
  }

  require(spec.rewards.size() == n, "rewards: expected one entry per player (" +
                                        std::to_string(n) + ")");
  double observed_max = 0.0;
  g.rewards_.reserve(n * S * J);
  for (std::size_t p = 0; p < n; ++p) {
    require(spec.rewards[p].size() == S, at("rewards", {p}) + ": expected one entry per state");
    for (std::size_t s = 0; s < S; ++s) {
      require(spec.rewards[p][s].size() == J,
              at("rewards", {p, s}) + ": expected " + std::to_string(J) + " joint actions");
      for (std::size_t j = 0; j < J; ++j) {
        const double r = spec.rewards[p][s][j];
        require(std::isfinite(r), at("rewards", {p, s, j}) + ": reward is not finite");
        require(r >= 0.0, at("rewards", {p, s, j}) + ": negative reward " + std::to_string(r));
        observed_max = std::max(observed_max, r);
        g.rewards_.push_back(r);
      }
    }
  }
  if (spec.r_max) {
    require(std::isfinite(*spec.r_max) && *spec.r_max >= 0.0, "r_max must be finite and >= 0");
    require(observed_max <= *spec.r_max,
            "reward " + std::to_string(observed_max) + " exceeds r_max " + std::to_string(*spec.r_max));
    g.r_max_ = *spec.r_max;
  } else {
    g.r_max_ = observed_max;
  }
  return g;
}

inline GameSpec StochasticGame::spec() const {
  GameSpec out;
  out.gamma = gamma_;
  out.states = state_names_;
  out.actions = action_names_;
  out.r_max = r_max_;
  const auto S = static_cast<std::size_t>(num_states());
  out.transitions.assign(S, {});
  for (int s = 0; s < num_states(); ++s) {
    for (int j = 0; j < num_joint_; ++j) {
      auto row = transition_row(s, j);
      out.transitions[static_cast<std::size_t>(s)].emplace_back(row.begin(), row.end());
    }
  }
  out.rewards.assign(counts_.size(), std::vector<std::vector<double>>(S));
  for (int p = 0; p < num_players(); ++p) {
    for (int s = 0; s < num_states(); ++s) {
      auto& dst = out.rewards[static_cast<std::size_t>(p)][static_cast<std::size_t>(s)];
      for (int j = 0; j < num_joint_; ++j) dst.push_back(reward(p, s, j));
    }
  }
  return out;
}

// --- strategy profiles -------------------------------------------------------

inline StrategyProfile make_profile(const StochasticGame& game, double fill = 0.0) {
  return StrategyProfile(game.action_counts(), game.num_states(), fill);
}

inline StrategyProfile uniform_profile(const StochasticGame& game) {
  StrategyProfile pi = make_profile(game);
  for (int p = 0; p < game.num_players(); ++p) {
    for (int s = 0; s < game.num_states(); ++s) {
      std::ranges::fill(pi.row(p, s), 1.0 / game.num_actions(p));
    }
  }
  return pi;
}

/// Point masses: actions[player][state] is the chosen action.
inline StrategyProfile pure_profile(const StochasticGame& game,
                                    const std::vector<std::vector<int>>& actions) {
  detail::require(static_cast<int>(actions.size()) == game.num_players(), "pure profile arity");
  StrategyProfile pi = make_profile(game);
  for (int p = 0; p < game.num_players(); ++p) {
    const auto& per_state = actions[static_cast<std::size_t>(p)];
    detail::require(static_cast<int>(per_state.size()) == game.num_states(), "pure profile states");
    for (int s = 0; s < game.num_states(); ++s) {
      const int a = per_state[static_cast<std::size_t>(s)];
      detail::require(a >= 0 && a < game.num_actions(p), "pure profile action out of range");
      pi(p, s, a) = 1.0;
    }
  }
  return pi;
}

inline void validate_profile(const StochasticGame& game, const StrategyProfile& pi,
                             double tol = kInputProbabilityTol) {
  detail::require(pi.action_counts() == game.action_counts() && pi.num_states() == game.num_states(),
                  "profile shape does not match the game");
  for (int p = 0; p < game.num_players(); ++p) {
    for (int s = 0; s < game.num_states(); ++s) {
      detail::check_distribution(pi.row(p, s), tol,
                                 detail::at("profile", {static_cast<std::size_t>(p),
                                                        static_cast<std::size_t>(s)}));
    }
  }
}

// --- marginalization ---------------------------------------------------------

namespace detail {

inline void require_shape(const StochasticGame& game, const StrategyProfile& pi) {
  require(pi.action_counts() == game.action_counts() && pi.num_states() == game.num_states(),
          "profile shape does not match the game");
}

/// Expected per-player reward and next-state distribution at one state, with
/// the joint action drawn from the product of dist(p). The joint tensor is
/// contracted one player at a time, last player first.
template <class DistOf>
void contract_state(const StochasticGame& game, int state, DistOf&& dist,
                    std::span<double> reward_out, std::span<double> next_out) {
  const int n = game.num_players();
  const int S = game.num_states();
  const auto width = static_cast<std::size_t>(n + S);
  int entries = game.num_joint_actions();
  std::vector<double> buf(static_cast<std::size_t>(entries) * width);
  for (int j = 0; j < entries; ++j) {
    double* cell = buf.data() + static_cast<std::size_t>(j) * width;
    for (int p = 0; p < n; ++p) cell[p] = game.reward(p, state, j);
    auto row = game.transition_row(state, j);
    std::copy(row.begin(), row.end(), cell + n);
  }
  for (int p = n - 1; p >= 0; --p) {
    const int A = game.num_actions(p);
    std::span<const double> probs = dist(p);
    const int next_entries = entries / A;
    for (int k = 0; k < next_entries; ++k) {
      double* dst = buf.data() + static_cast<std::size_t>(k) * width;
      std::vector<double> acc(width, 0.0);
      for (int a = 0; a < A; ++a) {
        const double w = probs[static_cast<std::size_t>(a)];
        if (w == 0.0) continue;
        const double* src = buf.data() + (static_cast<std::size_t>(k) * A + a) * width;
        for (std::size_t c = 0; c < width; ++c) acc[c] += w * src[c];
      }
      std::copy(acc.begin(), acc.end(), dst);
    }
    entries = next_entries;
  }
  std::copy(buf.begin(), buf.begin() + n, reward_out.begin());
  std::copy(buf.begin() + n, buf.begin() + n + S, next_out.begin());
}

}  // namespace detail

/// r^{i,pi}(s) for every player (rows) and state (columns), plus P^pi.
struct Marginals {
  Eigen::MatrixXd reward;      // n x S
  Eigen::MatrixXd transition;  // S x S, row = current state
};

inline Marginals marginals(const StochasticGame& game, const StrategyProfile& pi) {
  detail::require_shape(game, pi);
  const int n = game.num_players();
  const int S = game.num_states();
  Marginals m{Eigen::MatrixXd(n, S), Eigen::MatrixXd(S, S)};
  std::vector<double> r(static_cast<std::size_t>(n));
  std::vector<double> next(static_cast<std::size_t>(S));
  for (int s = 0; s < S; ++s) {
    detail::contract_state(game, s, [&](int p) { return pi.row(p, s); }, r, next);
    for (int p = 0; p < n; ++p) m.reward(p, s) = r[static_cast<std::size_t>(p)];
    for (int t = 0; t < S; ++t) m.transition(s, t) = next[static_cast<std::size_t>(t)];
  }
  return m;
}

inline Eigen::VectorXd marginal_reward(const StochasticGame& game, const StrategyProfile& pi,
                                       int player) {
  detail::require(player >= 0 && player < game.num_players(), "player index out of range");
  return marginals(game, pi).reward.row(player).transpose();
}

inline Eigen::MatrixXd marginal_transition(const StochasticGame& game, const StrategyProfile& pi) {
  return marginals(game, pi).transition;
}

/// Solves (I - gamma P) V = r for every column of rhs by LU with partial pivoting.
inline Eigen::MatrixXd solve_discounted(double gamma, const Eigen::MatrixXd& transition,
                                        const Eigen::MatrixXd& rhs) {
  const auto S = transition.rows();
  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(S, S) - gamma * transition;
  return system.partialPivLu().solve(rhs);
}

/// (I - gamma P^pi)^{-1}.
inline Eigen::MatrixXd resolvent(const StochasticGame& game, const StrategyProfile& pi) {
  const auto P = marginal_transition(game, pi);
  return solve_discounted(game.gamma(), P, Eigen::MatrixXd::Identity(P.rows(), P.cols()));
}

inline ValueVector value_function(const StochasticGame& game, const StrategyProfile& pi,
                                  int player) {
  detail::require(player >= 0 && player < game.num_players(), "player index out of range");
  const Marginals m = marginals(game, pi);
  return solve_discounted(game.gamma(), m.transition, m.reward.row(player).transpose());
}

/// Value vectors of all players, as columns of an S x n matrix.
inline Eigen::MatrixXd all_value_functions(const StochasticGame& game, const StrategyProfile& pi) {
  const Marginals m = marginals(game, pi);
  return solve_discounted(game.gamma(), m.transition, m.reward.transpose());
}

namespace detail {

/// V at `state` after replacing player's distribution there by a point mass,
/// given the marginals of the unmodified profile.
inline double deviation_value_from(const StochasticGame& game, const StrategyProfile& pi,
                                   const Marginals& base, int player, int state, int action) {
  const int n = game.num_players();
  const int S = game.num_states();
  std::vector<double> point(static_cast<std::size_t>(game.num_actions(player)), 0.0);
  point[static_cast<std::size_t>(action)] = 1.0;
  std::vector<double> r(static_cast<std::size_t>(n));
  std::vector<double> next(static_cast<std::size_t>(S));
  contract_state(
      game, state,
      [&](int p) -> std::span<const double> {
        if (p == player) return point;
        return pi.row(p, state);
      },
      r, next);
  Eigen::MatrixXd P = base.transition;
  Eigen::VectorXd reward = base.reward.row(player).transpose();
  for (int t = 0; t < S; ++t) P(state, t) = next[static_cast<std::size_t>(t)];
  reward(state) = r[static_cast<std::size_t>(player)];
  return solve_discounted(game.gamma(), P, reward)(state);
}

}  // namespace detail

/// Value at `state` for `player` when that player plays `action` for sure at
/// `state` and keeps its mixed strategy everywhere else.
inline double deviation_value(const StochasticGame& game, const StrategyProfile& pi, int player,
                              int state, int action) {
  detail::require(player >= 0 && player < game.num_players(), "player index out of range");
  detail::require(state >= 0 && state < game.num_states(), "state index out of range");
  detail::require(action >= 0 && action < game.num_actions(player), "action index out of range");
  return detail::deviation_value_from(game, pi, marginals(game, pi), player, state, action);
}

}  // namespace mpe
