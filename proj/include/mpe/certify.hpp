#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "mpe/game.hpp"
#include "mpe/nash_map.hpp"

namespace mpe {

/// Single-agent MDP faced by `player` when everyone else is frozen.
struct InducedMdp {
  std::vector<Eigen::MatrixXd> transition;  // [action] S x S
  Eigen::MatrixXd reward;                   // S x A
};

inline InducedMdp induced_mdp(const StochasticGame& game, const StrategyProfile& pi, int player) {
  detail::require_shape(game, pi);
  detail::require(player >= 0 && player < game.num_players(), "player index out of range");
  const int S = game.num_states();
  const int A = game.num_actions(player);
  InducedMdp mdp{{}, Eigen::MatrixXd(S, A)};
  StrategyProfile committed = pi;
  for (int a = 0; a < A; ++a) {
    for (int s = 0; s < S; ++s) {
      auto row = committed.row(player, s);
      std::ranges::fill(row, 0.0);
      row[static_cast<std::size_t>(a)] = 1.0;
    }
    Marginals m = marginals(game, committed);
    mdp.transition.push_back(std::move(m.transition));
    mdp.reward.col(a) = m.reward.row(player).transpose();
  }
  return mdp;
}

struct BestResponse {
  ValueVector values;
  std::vector<int> policy;  // deterministic action per state
  int iterations = 0;
};

/// Optimal values of the induced MDP by policy iteration with exact linear
/// evaluation. Greedy steps pick the lowest-index maximizer; the incumbent
/// action is kept when it is within tolerance of the max so the loop cannot
/// cycle between tied policies.
inline BestResponse best_response(const StochasticGame& game, const StrategyProfile& pi, int player) {
  const InducedMdp mdp = induced_mdp(game, pi, player);
  const int S = game.num_states();
  const int A = game.num_actions(player);
  const double gamma = game.gamma();
  const double tol = 1e-12 * (1.0 + game.r_max() / (1.0 - gamma));

  BestResponse br;
  br.policy.assign(static_cast<std::size_t>(S), 0);
  for (int s = 0; s < S; ++s) {
    Eigen::Index best = 0;
    mdp.reward.row(s).maxCoeff(&best);
    br.policy[static_cast<std::size_t>(s)] = static_cast<int>(best);
  }

  auto evaluate = [&](const std::vector<int>& policy) {
    Eigen::MatrixXd P(S, S);
    Eigen::VectorXd r(S);
    for (int s = 0; s < S; ++s) {
      const int a = policy[static_cast<std::size_t>(s)];
      P.row(s) = mdp.transition[static_cast<std::size_t>(a)].row(s);
      r(s) = mdp.reward(s, a);
    }
    return Eigen::VectorXd(solve_discounted(gamma, P, r));
  };

  constexpr int kMaxIterations = 10'000;
  for (br.iterations = 1; br.iterations <= kMaxIterations; ++br.iterations) {
    br.values = evaluate(br.policy);
    std::vector<int> next = br.policy;
    for (int s = 0; s < S; ++s) {
      Eigen::VectorXd q(A);
      for (int a = 0; a < A; ++a) {
        q(a) = mdp.reward(s, a) +
               gamma * mdp.transition[static_cast<std::size_t>(a)].row(s).dot(br.values);
      }
      const double best = q.maxCoeff();
      const int current = br.policy[static_cast<std::size_t>(s)];
      if (q(current) >= best - tol) continue;
      for (int a = 0; a < A; ++a) {
        if (q(a) >= best - tol) {
          next[static_cast<std::size_t>(s)] = a;
          break;
        }
      }
    }
    if (next == br.policy) return br;
    br.policy = std::move(next);
  }
  throw std::runtime_error("policy iteration did not terminate");
}

inline ValueVector best_response_values(const StochasticGame& game, const StrategyProfile& pi,
                                        int player) {
  return best_response(game, pi, player).values;
}

/// max_s |V(s) - max_a (r(s,a) + gamma P(.|s,a) V)| for the induced MDP.
inline double bellman_optimality_residual(const StochasticGame& game, const StrategyProfile& pi,
                                          int player, const ValueVector& values) {
  const InducedMdp mdp = induced_mdp(game, pi, player);
  double worst = 0.0;
  for (int s = 0; s < game.num_states(); ++s) {
    double best = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < game.num_actions(player); ++a) {
      best = std::max(best, mdp.reward(s, a) + game.gamma() *
                                                   mdp.transition[static_cast<std::size_t>(a)]
                                                       .row(s)
                                                       .dot(values));
    }
    worst = std::max(worst, std::abs(values(s) - best));
  }
  return worst;
}

// --- bound chain -------------------------------------------------------------

/// eps' = eps (1 + A_max R_max / (1 - gamma)).
inline double epsilon_prime(const StochasticGame& game, double eps) {
  detail::require(eps >= 0.0, "eps must be nonnegative");
  return eps * (1.0 + game.max_actions() * game.r_max() / (1.0 - game.gamma()));
}

/// Upper bound on every one-shot gain when ||f(pi) - pi|| <= eps:
/// A_max (sqrt(eps')/(1-gamma) + R_max sqrt(eps') + eps').
inline double residual_to_gain_bound(const StochasticGame& game, double eps) {
  const double ep = epsilon_prime(game, eps);
  const double root = std::sqrt(ep);
  return game.max_actions() * (root / (1.0 - game.gamma()) + game.r_max() * root + ep);
}

/// Regret bound implied by residual eps: gain bound / (1 - gamma).
inline double residual_to_mpe_bound(const StochasticGame& game, double eps) {
  return residual_to_gain_bound(game, eps) / (1.0 - game.gamma());
}

/// Grid size making a stopping simplex a 1/L-approximate equilibrium:
/// ceil(32 A_max^5 R_max^3 (lambda + 1) L^2 / (1 - gamma)^5).
inline std::uint64_t choose_d(const StochasticGame& game, std::uint64_t L) {
  detail::require(L >= 1, "L must be a positive integer");
  const long double A = game.max_actions();
  const long double R = game.r_max();
  const long double lambda = lipschitz_constant(game);
  const long double slack = 1.0L - game.gamma();
  const long double Ld = static_cast<long double>(L);
  const long double d = 32.0L * std::pow(A, 5.0L) * R * R * R * (lambda + 1.0L) * Ld * Ld /
                        std::pow(slack, 5.0L);
  const long double up = std::ceil(d);
  if (!(up < 18446744073709551615.0L)) throw TooLarge("choose_d overflows 64 bits");
  return static_cast<std::uint64_t>(up);
}

// --- certificates ------------------------------------------------------------

struct Certificate {
  double residual = 0.0;
  std::vector<std::vector<double>> per_state_regret;  // [player][state]
  std::vector<ValueVector> values;                    // V^pi per player
  std::vector<ValueVector> best_response_values;      // V* per player
  double epsilon_bound = 0.0;
  double epsilon_achieved = 0.0;
  double lambda = 0.0;
  std::optional<double> target_L;
  std::optional<bool> verdict;  // epsilon_achieved <= 1/L
  std::optional<std::uint64_t> target_d;
  std::optional<int> grid_d;
};

/// Measures the exact regret of every player at every state against a best
/// response, alongside the theoretical bound implied by the fixed-point
/// residual. The measured regret decides the verdict.
inline Certificate certify_profile(const StochasticGame& game, const StrategyProfile& pi,
                                   std::optional<double> target_L = std::nullopt) {
  validate_profile(game, pi, kArithmeticProbabilityTol);
  Certificate cert;
  cert.residual = residual(game, pi);
  cert.lambda = lipschitz_constant(game);
  cert.epsilon_bound = residual_to_mpe_bound(game, cert.residual);
  const Eigen::MatrixXd values = all_value_functions(game, pi);
  cert.epsilon_achieved = -std::numeric_limits<double>::infinity();
  for (int p = 0; p < game.num_players(); ++p) {
    ValueVector own = values.col(p);
    ValueVector best = best_response_values(game, pi, p);
    std::vector<double> regrets(static_cast<std::size_t>(game.num_states()));
    for (int s = 0; s < game.num_states(); ++s) {
      regrets[static_cast<std::size_t>(s)] = best(s) - own(s);
      cert.epsilon_achieved = std::max(cert.epsilon_achieved, best(s) - own(s));
    }
    cert.per_state_regret.push_back(std::move(regrets));
    cert.values.push_back(std::move(own));
    cert.best_response_values.push_back(std::move(best));
  }
  if (target_L) {
    detail::require(*target_L > 0.0, "target L must be positive");
    cert.target_L = target_L;
    cert.verdict = cert.epsilon_achieved <= 1.0 / *target_L;
    const double rounded = std::floor(*target_L);
    if (rounded == *target_L) {
      try {
        cert.target_d = choose_d(game, static_cast<std::uint64_t>(rounded));
      } catch (const TooLarge&) {
      }
    }
  }
  return cert;
}

/// Report of the gain-to-regret step: max gain g versus regrets <= g/(1-gamma).
struct GainRegretReport {
  double max_gain = 0.0;
  double max_regret = 0.0;
  double bound = 0.0;
  bool pass = false;
};

inline GainRegretReport gain_to_regret_check(const StochasticGame& game, const StrategyProfile& pi,
                                             double slack = 1e-8) {
  GainRegretReport report;
  report.max_gain = gain_table(game, pi).max();
  report.bound = report.max_gain / (1.0 - game.gamma());
  const Eigen::MatrixXd values = all_value_functions(game, pi);
  report.max_regret = -std::numeric_limits<double>::infinity();
  for (int p = 0; p < game.num_players(); ++p) {
    const ValueVector best = best_response_values(game, pi, p);
    report.max_regret = std::max(report.max_regret, (best - values.col(p)).maxCoeff());
  }
  report.pass = report.max_regret <= report.bound + slack;
  return report;
}

}  // namespace mpe
