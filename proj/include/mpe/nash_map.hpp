#pragma once

#include <cmath>

#include "mpe/game.hpp"

namespace mpe {

/// Differences within this distance of zero are treated as no gain.
inline constexpr double kGainClamp = 1e-12;

/// One-shot deviation gains D(i, s, a) = max(0, V_{pi(s,a)=1}(s) - V(s)).
struct GainTable {
  ProfileArray<double> gains;

  double max() const {
    double worst = 0.0;
    for (double g : gains.flat()) worst = std::max(worst, g);
    return worst;
  }
  bool all_zero() const { return max() == 0.0; }
};

inline GainTable gain_table(const StochasticGame& game, const StrategyProfile& pi) {
  detail::require_shape(game, pi);
  const Marginals base = marginals(game, pi);
  const Eigen::MatrixXd values =
      solve_discounted(game.gamma(), base.transition, base.reward.transpose());
  GainTable table{make_profile(game)};
  for (int p = 0; p < game.num_players(); ++p) {
    for (int s = 0; s < game.num_states(); ++s) {
      for (int a = 0; a < game.num_actions(p); ++a) {
        const double diff = detail::deviation_value_from(game, pi, base, p, s, a) - values(s, p);
        table.gains(p, s, a) = diff > kGainClamp ? diff : 0.0;
      }
    }
  }
  return table;
}

/// Nash improvement map: shifts mass toward actions with a positive one-shot
/// gain. Fixed points are exactly the Markov perfect equilibria.
inline StrategyProfile apply_f(const StochasticGame& game, const StrategyProfile& pi,
                               const GainTable& table) {
  StrategyProfile out = pi;
  for (int p = 0; p < game.num_players(); ++p) {
    for (int s = 0; s < game.num_states(); ++s) {
      auto gains = table.gains.row(p, s);
      double total = 0.0;
      for (double g : gains) total += g;
      if (total == 0.0) continue;
      auto src = pi.row(p, s);
      auto dst = out.row(p, s);
      for (std::size_t a = 0; a < dst.size(); ++a) dst[a] = (src[a] + gains[a]) / (1.0 + total);
    }
  }
  return out;
}

inline StrategyProfile apply_f(const StochasticGame& game, const StrategyProfile& pi) {
  return apply_f(game, pi, gain_table(game, pi));
}

/// ||f(pi) - pi||_inf.
inline double residual(const StochasticGame& game, const StrategyProfile& pi) {
  return max_abs_diff(apply_f(game, pi), pi);
}

/// lambda = 9 n S^2 A_max^2 R_max / (1 - gamma)^2.
inline double lipschitz_constant(const StochasticGame& game) {
  const double n = game.num_players();
  const double S = game.num_states();
  const double A = game.max_actions();
  const double slack = 1.0 - game.gamma();
  return 9.0 * n * S * S * A * A * game.r_max() / (slack * slack);
}

}  // namespace mpe
