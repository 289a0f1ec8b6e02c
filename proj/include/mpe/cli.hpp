#pragma once

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mpe/certify.hpp"
#include "mpe/io.hpp"
#include "mpe/oracles.hpp"
#include "mpe/simplicial.hpp"
#include "mpe/solve.hpp"

namespace mpe::cli {

enum ExitCode : int { kOk = 0, kVerdictFalse = 1, kInputError = 2, kMethodFailure = 3 };

using io::Json;

inline void emit(std::ostream& out, const Json& j) { out << j.dump(2) << '\n'; }

inline int verdict_code(const Certificate& cert) {
  return (cert.verdict && !*cert.verdict) ? kVerdictFalse : kOk;
}

// --- info ------------------------------------------------------------------------

inline int cmd_info(const std::string& game_path, std::optional<std::uint64_t> L, std::ostream& out) {
  const StochasticGame game = io::load_game(game_path);
  Json j;
  j["players"] = game.num_players();
  j["states"] = game.num_states();
  j["actions"] = game.action_counts();
  j["joint_actions"] = game.num_joint_actions();
  j["gamma"] = io::number(game.gamma());
  j["r_max"] = io::number(game.r_max());
  j["a_max"] = game.max_actions();
  j["lambda"] = io::number(lipschitz_constant(game));
  if (L) {
    j["L"] = *L;
    try {
      j["d"] = choose_d(game, *L);
    } catch (const TooLarge&) {
      j["d"] = "overflow";
    }
  }
  emit(out, j);
  return kOk;
}

// --- solve / search ----------------------------------------------------------------

inline Json solve_report(const StochasticGame& game, const SolveResult& r) {
  Json j;
  j["method"] = to_string(r.method);
  if (r.method == SolveMethod::kDampedF) {
    j["heuristic"] = true;
    j["note"] = "damped-f carries no convergence guarantee; the certificate is the claim";
  }
  j["status"] = to_string(r.status);
  if (r.method == SolveMethod::kDampedF) j["iterations"] = r.iterations;
  j["residual"] = io::number(r.residual);
  j["profile"] = io::nested(r.profile);
  if (r.grid_point) {
    j["grid_point"] = Json{{"d", r.grid_point->d}, {"numerators", io::nested(r.grid_point->numerators)}};
  }
  if (r.simplex) {
    j["simplex"] = io::simplex_to_json(game, r.simplex->simplex, &r.simplex->classification);
    const auto check = stopping_residual_check(game, r.simplex->simplex, r.simplex->simplex.base.d);
    j["stopping_bound"] = io::number(check.bound);
    j["stopping_bound_holds"] = check.pass;
  }
  j["certificate"] = io::certificate_to_json(game, r.certificate);
  return j;
}

inline int cmd_solve(const std::string& game_path, const SolveOptions& opt, std::ostream& out) {
  const StochasticGame game = io::load_game(game_path);
  const SolveResult r = solve(game, opt);
  emit(out, solve_report(game, r));
  if (!r.ok()) return kMethodFailure;
  return verdict_code(r.certificate);
}

// --- certify ------------------------------------------------------------------------

inline int cmd_certify(const std::string& game_path, const std::string& profile_path,
                       std::optional<double> target_L, std::ostream& out) {
  const StochasticGame game = io::load_game(game_path);
  StrategyProfile pi;
  try {
    pi = io::profile_from_json(game, io::parse_file(profile_path));
  } catch (const InvalidInput& e) {
    throw InvalidInput(profile_path + ": " + e.what());
  }
  const Certificate cert = certify_profile(game, pi, target_L);
  emit(out, Json{{"certificate", io::certificate_to_json(game, cert)}});
  return verdict_code(cert);
}

// --- label ---------------------------------------------------------------------------

/// A point argument is inline JSON when it starts with '[' or '{', else a file path.
inline Json point_argument(const std::string& arg) {
  if (!arg.empty() && (arg.front() == '[' || arg.front() == '{')) return io::parse_text(arg, "--point");
  return io::parse_file(arg);
}

inline int cmd_label(const std::string& game_path, int d, const std::vector<std::string>& points,
                     const std::optional<std::string>& simplex_path, std::ostream& out) {
  const StochasticGame game = io::load_game(game_path);
  Json j;
  if (simplex_path) {
    const GridSimplex sigma = io::simplex_from_json(game, io::parse_file(*simplex_path));
    const SimplexClass cls = classify_simplex(game, sigma);
    j["simplex"] = io::simplex_to_json(game, sigma, &cls);
    j["classification"] = io::classification_name(game, cls);
    emit(out, j);
    return kOk;
  }
  detail::require(d >= 1, "--d must be >= 1");
  j["d"] = d;
  j["points"] = Json::array();
  auto add = [&](const GridProfile& p) {
    j["points"].push_back(
        Json{{"numerators", io::nested(p.numerators)}, {"label", io::label_json(game, label_point(game, p))}});
  };
  if (points.empty()) {
    for (const auto& p : grid_points(game, d)) add(p);
  } else {
    for (const auto& arg : points) {
      const GridProfile p = io::grid_point_from_json(game, point_argument(arg), d);
      detail::require(p.d == d, "point is on a grid of size " + std::to_string(p.d) + ", not " +
                                    std::to_string(d));
      add(p);
    }
  }
  emit(out, j);
  return kOk;
}

// --- generate ------------------------------------------------------------------------

inline int cmd_generate(const std::vector<int>& actions, int states, double gamma,
                        std::uint64_t seed, std::ostream& out) {
  detail::require(!actions.empty(), "--actions needs at least one player");
  Rng rng(seed);
  emit(out, io::to_json(random_game(rng, actions, states, gamma)));
  return kOk;
}

// --- dispatch ---------------------------------------------------------------------------

/// Runs one command; args exclude the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Markov perfect equilibria of stochastic games: evaluate, certify, label, search"};
  app.require_subcommand(1);

  std::string game_path;
  std::string profile_path;

  auto* info = app.add_subcommand("info", "Print game dimensions, lambda and d for a target L");
  std::uint64_t info_L = 0;
  info->add_option("game", game_path, "game file")->required();
  auto* info_L_opt = info->add_option("--L", info_L, "target 1/L accuracy")->check(CLI::PositiveNumber);

  SolveOptions sopt;
  std::string method = "damped-f";
  double target_L = 0.0;
  bool uniform_start = false;
  bool plain = false;
  auto add_solve_flags = [&](CLI::App* sub, bool with_method) {
    sub->add_option("game", game_path, "game file")->required();
    if (with_method) {
      sub->add_option("--method", method, "damped-f | grid | simplicial")
          ->check(CLI::IsMember({"damped-f", "grid", "simplicial"}));
    }
    sub->add_option("--d", sopt.d, "grid size for grid/simplicial")->check(CLI::PositiveNumber);
    sub->add_option("--damping", sopt.damping, "damped-f step size in (0, 1]");
    sub->add_option("--max-iters", sopt.max_iters, "damped-f iteration cap");
    sub->add_option("--tol", sopt.tol, "residual target");
    sub->add_option("--seed", sopt.seed, "seed for the random starting profile");
    sub->add_option("--target-L", target_L, "verdict threshold 1/L")->check(CLI::PositiveNumber);
    sub->add_flag("--uniform-start", uniform_start, "start damped-f from the uniform profile");
    sub->add_flag("--plain", plain, "literal damped update without extragradient correction");
  };
  auto* solve_cmd = app.add_subcommand("solve", "Search for an approximate MPE and certify it");
  add_solve_flags(solve_cmd, true);
  auto* search_cmd = app.add_subcommand("search", "Alias of solve --method=simplicial");
  add_solve_flags(search_cmd, false);

  auto* certify_cmd = app.add_subcommand("certify", "Certify a profile against best responses");
  certify_cmd->add_option("game", game_path, "game file")->required();
  certify_cmd->add_option("profile", profile_path, "profile file")->required();
  certify_cmd->add_option("--target-L", target_L, "verdict threshold 1/L")->check(CLI::PositiveNumber);

  auto* label_cmd = app.add_subcommand("label", "Label grid points or classify a simplex");
  int label_d = 0;
  std::vector<std::string> points;
  std::string simplex_path;
  label_cmd->add_option("game", game_path, "game file")->required();
  label_cmd->add_option("--d", label_d, "grid size");
  // No extra-arg mode: CLI11 would otherwise split a bracketed JSON value on commas.
  label_cmd->add_option("--point", points, "grid numerators as JSON text or a file path")
      ->allow_extra_args(false);
  auto* simplex_opt = label_cmd->add_option("--simplex", simplex_path, "simplex file");

  auto* gen_cmd = app.add_subcommand("generate", "Emit a random game file");
  std::vector<int> gen_actions{2, 2};
  int gen_states = 2;
  double gen_gamma = 0.5;
  std::uint64_t gen_seed = 0;
  gen_cmd->add_option("--actions", gen_actions, "actions per player")->delimiter(',');
  gen_cmd->add_option("--states", gen_states, "number of states")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--gamma", gen_gamma, "discount factor");
  gen_cmd->add_option("--seed", gen_seed, "generator seed");

  std::vector<std::string> storage{"mpe"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  std::optional<double> target;
  if (target_L > 0.0) target = target_L;
  try {
    if (*info) {
      return cmd_info(game_path, info_L_opt->count() ? std::optional(info_L) : std::nullopt, out);
    }
    if (*solve_cmd || *search_cmd) {
      sopt.method = *search_cmd ? SolveMethod::kSimplicial : *parse_method(method);
      sopt.target_L = target;
      sopt.random_start = !uniform_start;
      sopt.extragradient = !plain;
      return cmd_solve(game_path, sopt, out);
    }
    if (*certify_cmd) return cmd_certify(game_path, profile_path, target, out);
    if (*label_cmd) {
      return cmd_label(game_path, label_d, points,
                       simplex_opt->count() ? std::optional(simplex_path) : std::nullopt, out);
    }
    if (*gen_cmd) return cmd_generate(gen_actions, gen_states, gen_gamma, gen_seed, out);
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const TooLarge& e) {
    err << "error: " << e.what() << '\n';
    return kMethodFailure;
  }
  return kInputError;
}

}  // namespace mpe::cli
