#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "mpe/certify.hpp"
#include "mpe/nash_map.hpp"
#include "mpe/oracles.hpp"
#include "mpe/simplicial.hpp"

namespace mpe {

enum class SolveMethod { kDampedF, kGrid, kSimplicial };

inline std::optional<SolveMethod> parse_method(const std::string& name) {
  if (name == "damped-f") return SolveMethod::kDampedF;
  if (name == "grid") return SolveMethod::kGrid;
  if (name == "simplicial") return SolveMethod::kSimplicial;
  return std::nullopt;
}

inline std::string to_string(SolveMethod m) {
  switch (m) {
    case SolveMethod::kDampedF:
      return "damped-f";
    case SolveMethod::kGrid:
      return "grid";
    case SolveMethod::kSimplicial:
      return "simplicial";
  }
  return "unknown";
}

struct SolveOptions {
  SolveMethod method = SolveMethod::kDampedF;
  int d = 8;
  double damping = 0.5;
  int max_iters = 100'000;
  double tol = 1e-12;
  std::uint64_t seed = 0;
  bool random_start = true;
  bool extragradient = true;  // false: plain pi <- (1 - alpha) pi + alpha f(pi)
  std::optional<double> target_L;
};

enum class SolveStatus { kConverged, kNotConverged, kFound, kNotFound };

inline std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kConverged:
      return "converged";
    case SolveStatus::kNotConverged:
      return "not-converged";
    case SolveStatus::kFound:
      return "found";
    case SolveStatus::kNotFound:
      return "not-found";
  }
  return "unknown";
}

struct SolveResult {
  SolveMethod method = SolveMethod::kDampedF;
  SolveStatus status = SolveStatus::kNotConverged;
  StrategyProfile profile;
  Certificate certificate;
  int iterations = 0;
  double residual = 0.0;
  std::optional<StoppingSimplex> simplex;
  std::optional<GridProfile> grid_point;

  bool ok() const { return status == SolveStatus::kConverged || status == SolveStatus::kFound; }
};

namespace detail {

/// Drops probabilities below `floor` and renormalizes each row.
inline StrategyProfile purify(const StochasticGame& game, const StrategyProfile& pi, double floor) {
  StrategyProfile out = pi;
  for (int p = 0; p < game.num_players(); ++p) {
    for (int s = 0; s < game.num_states(); ++s) {
      auto row = out.row(p, s);
      double total = 0.0;
      for (auto& x : row) {
        if (x < floor) x = 0.0;
        total += x;
      }
      if (total <= 0.0) {
        auto src = pi.row(p, s);
        std::ranges::copy(src, row.begin());
        continue;
      }
      for (auto& x : row) x /= total;
    }
  }
  return out;
}

inline SolveResult damped_f(const StochasticGame& game, const SolveOptions& opt) {
  require(opt.damping > 0.0 && opt.damping <= 1.0, "damping must lie in (0, 1]");
  require(opt.max_iters >= 0, "max-iters must be >= 0");
  SolveResult out;
  Rng rng(opt.seed);
  StrategyProfile pi = opt.random_start ? random_profile(rng, game) : uniform_profile(game);
  StrategyProfile best = pi;
  double best_residual = std::numeric_limits<double>::infinity();
  // Around a mixed equilibrium the field f(pi) - pi is close to a rotation,
  // and the plain damped step spirals outward into a limit cycle whose size
  // scales with the step. The extragradient form re-evaluates f at the
  // half-step and moves from pi along that direction, which contracts
  // rotations.
  StrategyProfile half = pi;
  int it = 0;
  for (;; ++it) {
    const StrategyProfile image = apply_f(game, pi);
    const double r = max_abs_diff(image, pi);
    if (r < best_residual) {
      best_residual = r;
      best = pi;
    }
    if (r <= opt.tol || it >= opt.max_iters) break;
    const double alpha = opt.damping;
    auto src = image.flat();
    auto cur = pi.flat();
    if (!opt.extragradient) {
      for (std::size_t k = 0; k < cur.size(); ++k) cur[k] = (1.0 - alpha) * cur[k] + alpha * src[k];
      continue;
    }
    auto mid = half.flat();
    for (std::size_t k = 0; k < cur.size(); ++k) mid[k] = (1.0 - alpha) * cur[k] + alpha * src[k];
    const StrategyProfile half_image = apply_f(game, half);
    auto hsrc = half_image.flat();
    for (std::size_t k = 0; k < cur.size(); ++k) cur[k] += alpha * (hsrc[k] - mid[k]);
  }
  // Iterates approach pure equilibria only sublinearly; snapping tiny
  // probabilities to zero often lands exactly on the fixed point.
  for (double floor = 1e-2; floor >= 1e-8; floor /= 10.0) {
    const StrategyProfile candidate = purify(game, best, floor);
    const double r = residual(game, candidate);
    if (r < best_residual) {
      best_residual = r;
      best = candidate;
    }
  }
  out.iterations = it;
  out.profile = std::move(best);
  out.residual = best_residual;
  out.status = best_residual <= opt.tol ? SolveStatus::kConverged : SolveStatus::kNotConverged;
  return out;
}

}  // namespace detail

/// Heuristic search for a near fixed point of f, followed by an independent
/// certificate. The certificate, not the method, carries the correctness claim.
inline SolveResult solve(const StochasticGame& game, const SolveOptions& opt) {
  SolveResult out;
  switch (opt.method) {
    case SolveMethod::kDampedF:
      out = detail::damped_f(game, opt);
      break;
    case SolveMethod::kGrid: {
      const GridArgmin best = grid_residual_argmin(game, opt.d);
      out.profile = best.point.to_profile();
      out.residual = best.residual;
      out.grid_point = best.point;
      out.status = SolveStatus::kFound;
      break;
    }
    case SolveMethod::kSimplicial: {
      auto found = find_stopping_simplex(game, opt.d);
      if (!found) {
        out.status = SolveStatus::kNotFound;
        out.profile = starting_point(game, opt.d).to_profile();
        out.residual = residual(game, out.profile);
        break;
      }
      double best = std::numeric_limits<double>::infinity();
      for (const auto& v : simplex_vertices(game, found->simplex)) {
        const StrategyProfile pi = v.to_profile();
        const double r = residual(game, pi);
        if (r < best) {
          best = r;
          out.profile = pi;
          out.grid_point = v;
        }
      }
      out.residual = best;
      out.simplex = std::move(found);
      out.status = SolveStatus::kFound;
      break;
    }
  }
  out.method = opt.method;
  out.certificate = certify_profile(game, out.profile, opt.target_L);
  if (opt.method != SolveMethod::kDampedF) out.certificate.grid_d = opt.d;
  return out;
}

}  // namespace mpe
