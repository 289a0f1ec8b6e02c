#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "mpe/certify.hpp"
#include "mpe/game.hpp"
#include "mpe/simplicial.hpp"

namespace mpe::io {

using Json = nlohmann::ordered_json;

/// Rounds to 12 significant digits so printed reports diff cleanly.
inline double round12(double x) {
  if (!std::isfinite(x) || x == 0.0) return x;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::strtod(buf, nullptr);
}

inline Json number(double x) { return round12(x); }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Json parse_text(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InvalidInput(origin + ": " + e.what());
  }
}

inline Json parse_file(const std::string& path) { return parse_text(read_file(path), path); }

namespace detail {

template <class T>
T get(const Json& j, const std::string& where) {
  try {
    return j.get<T>();
  } catch (const Json::exception& e) {
    throw InvalidInput(where + ": " + e.what());
  }
}

inline const Json& field(const Json& j, const char* key) {
  if (!j.is_object()) throw InvalidInput("expected a JSON object");
  auto it = j.find(key);
  if (it == j.end()) throw InvalidInput(std::string("missing field '") + key + "'");
  return *it;
}

}  // namespace detail

// --- games ---------------------------------------------------------------------

inline GameSpec game_spec_from_json(const Json& j) {
  using detail::field;
  using detail::get;
  GameSpec spec;
  spec.gamma = get<double>(field(j, "gamma"), "gamma");
  spec.states = get<std::vector<std::string>>(field(j, "states"), "states");
  const Json& players = field(j, "players");
  if (!players.is_array()) throw InvalidInput("players: expected an array");
  for (std::size_t p = 0; p < players.size(); ++p) {
    const std::string where = "players[" + std::to_string(p) + "]";
    if (!players[p].is_object() || !players[p].contains("actions")) {
      throw InvalidInput(where + ": expected { \"actions\": [...] }");
    }
    spec.actions.push_back(get<std::vector<std::string>>(players[p]["actions"], where + ".actions"));
  }
  spec.transitions =
      get<std::vector<std::vector<std::vector<double>>>>(field(j, "transitions"), "transitions");
  spec.rewards = get<std::vector<std::vector<std::vector<double>>>>(field(j, "rewards"), "rewards");
  if (j.contains("r_max") && !j["r_max"].is_null()) spec.r_max = get<double>(j["r_max"], "r_max");
  return spec;
}

inline StochasticGame game_from_json(const Json& j) { return validate_game(game_spec_from_json(j)); }

inline StochasticGame load_game(const std::string& path) {
  const Json j = parse_file(path);
  try {
    return game_from_json(j);
  } catch (const InvalidInput& e) {
    throw InvalidInput(path + ": " + e.what());
  }
}

inline Json to_json(const StochasticGame& game) {
  const GameSpec spec = game.spec();
  Json j;
  j["gamma"] = spec.gamma;
  j["states"] = spec.states;
  j["players"] = Json::array();
  for (const auto& names : spec.actions) j["players"].push_back({{"actions", names}});
  j["transitions"] = spec.transitions;
  j["rewards"] = spec.rewards;
  if (spec.r_max) j["r_max"] = *spec.r_max;
  return j;
}

// --- profiles ----------------------------------------------------------------------

template <class T>
Json nested(const ProfileArray<T>& a, bool round = false) {
  Json out = Json::array();
  for (int p = 0; p < a.num_players(); ++p) {
    Json per_player = Json::array();
    for (int s = 0; s < a.num_states(); ++s) {
      Json row = Json::array();
      for (T x : a.row(p, s)) {
        if constexpr (std::is_floating_point_v<T>) {
          row.push_back(round ? round12(x) : x);
        } else {
          row.push_back(x);
        }
      }
      per_player.push_back(std::move(row));
    }
    out.push_back(std::move(per_player));
  }
  return out;
}

template <class T>
ProfileArray<T> nested_from_json(const StochasticGame& game, const Json& j, const std::string& what) {
  const auto raw = detail::get<std::vector<std::vector<std::vector<T>>>>(j, what);
  mpe::detail::require(static_cast<int>(raw.size()) == game.num_players(),
                       what + ": expected " + std::to_string(game.num_players()) + " players");
  ProfileArray<T> out(game.action_counts(), game.num_states(), T{});
  for (int p = 0; p < game.num_players(); ++p) {
    const auto& per_player = raw[static_cast<std::size_t>(p)];
    mpe::detail::require(static_cast<int>(per_player.size()) == game.num_states(),
                         what + "[" + std::to_string(p) + "]: expected " +
                             std::to_string(game.num_states()) + " states");
    for (int s = 0; s < game.num_states(); ++s) {
      const auto& row = per_player[static_cast<std::size_t>(s)];
      mpe::detail::require(static_cast<int>(row.size()) == game.num_actions(p),
                           what + "[" + std::to_string(p) + "][" + std::to_string(s) +
                               "]: expected " + std::to_string(game.num_actions(p)) + " actions");
      std::ranges::copy(row, out.row(p, s).begin());
    }
  }
  return out;
}

/// Accepts a bare nested array or any object carrying a "profile" field
/// (so a solve report can be fed straight back in).
inline StrategyProfile profile_from_json(const StochasticGame& game, const Json& j) {
  const Json& body = j.is_object() ? detail::field(j, "profile") : j;
  StrategyProfile pi = nested_from_json<double>(game, body, "profile");
  validate_profile(game, pi);
  return pi;
}

// Full precision: a profile is data that must re-validate at the 1e-12 input tolerance.
inline Json profile_to_json(const StrategyProfile& pi) { return Json{{"profile", nested(pi)}}; }

// --- grid points and simplices ----------------------------------------------------------

inline GridProfile grid_point_from_json(const StochasticGame& game, const Json& j, int d) {
  const Json& body = j.is_object() ? detail::field(j, "numerators") : j;
  if (j.is_object() && j.contains("d")) d = detail::get<int>(j["d"], "d");
  GridProfile p{d, nested_from_json<int>(game, body, "numerators")};
  validate_grid_profile(game, p);
  return p;
}

inline Json coordinate_json(const Coordinate& c) { return Json::array({c.player, c.state, c.action}); }

inline std::string label_name(const StochasticGame& game, const Label& l) {
  return "(" + std::to_string(l.player + 1) + ", " +
         game.state_names()[static_cast<std::size_t>(l.state)] + ", " +
         game.action_names(l.player)[static_cast<std::size_t>(l.action)] + ")";
}

inline Json label_json(const StochasticGame& game, const Label& l) {
  return Json{{"index", coordinate_json(l)}, {"name", label_name(game, l)}};
}

inline std::string classification_name(const StochasticGame& game, const SimplexClass& c) {
  if (c.kind != SimplexKind::kStopping) return to_string(c.kind);
  return "stopping(" + std::to_string(c.player + 1) + ", " +
         game.state_names()[static_cast<std::size_t>(c.state)] + ")";
}

inline Json simplex_to_json(const StochasticGame& game, const GridSimplex& sigma,
                            const SimplexClass* cls = nullptr) {
  Json j;
  j["d"] = sigma.base.d;
  j["base"] = nested(sigma.base.numerators);
  j["index_set"] = Json::array();
  for (const auto& c : sigma.index_set) j["index_set"].push_back(coordinate_json(c));
  j["permutation"] = sigma.permutation;
  if (cls) {
    j["labels"] = Json::array();
    for (const auto& l : cls->labels) j["labels"].push_back(label_json(game, l));
    j["classification"] = classification_name(game, *cls);
  }
  return j;
}

/// Reads a simplex object, or a report with a "simplex" field. Labels and
/// classification in the file are ignored; they are recomputed on use.
inline GridSimplex simplex_from_json(const StochasticGame& game, const Json& j) {
  const Json& body = (j.is_object() && j.contains("simplex")) ? j["simplex"] : j;
  GridSimplex sigma;
  const int d = detail::get<int>(detail::field(body, "d"), "d");
  sigma.base = GridProfile{d, nested_from_json<int>(game, detail::field(body, "base"), "base")};
  validate_grid_profile(game, sigma.base);
  const auto triples = detail::get<std::vector<std::vector<int>>>(detail::field(body, "index_set"),
                                                                  "index_set");
  for (const auto& t : triples) {
    mpe::detail::require(t.size() == 3, "index_set entries must be [player, state, action]");
    const Coordinate c{t[0], t[1], t[2]};
    mpe::detail::require(sigma.base.numerators.valid(c), "index_set entry out of range");
    sigma.index_set.push_back(c);
  }
  sigma.permutation = detail::get<std::vector<int>>(detail::field(body, "permutation"), "permutation");
  return sigma;
}

// --- certificates -------------------------------------------------------------------

inline Json certificate_to_json(const StochasticGame& game, const Certificate& cert) {
  Json j;
  j["residual"] = number(cert.residual);
  j["epsilon_bound"] = number(cert.epsilon_bound);
  j["epsilon_achieved"] = number(cert.epsilon_achieved);
  j["lambda"] = number(cert.lambda);
  j["per_state_regret"] = Json::array();
  for (const auto& row : cert.per_state_regret) {
    Json r = Json::array();
    for (double x : row) r.push_back(number(x));
    j["per_state_regret"].push_back(std::move(r));
  }
  auto vectors = [](const std::vector<ValueVector>& vs) {
    Json out = Json::array();
    for (const auto& v : vs) {
      Json r = Json::array();
      for (Eigen::Index s = 0; s < v.size(); ++s) r.push_back(number(v(s)));
      out.push_back(std::move(r));
    }
    return out;
  };
  j["values"] = vectors(cert.values);
  j["best_response_values"] = vectors(cert.best_response_values);
  j["states"] = game.state_names();
  if (cert.target_L) {
    j["target_L"] = number(*cert.target_L);
    j["target_epsilon"] = number(1.0 / *cert.target_L);
  }
  if (cert.verdict) j["verdict"] = *cert.verdict;
  if (cert.target_d) j["d_for_target"] = *cert.target_d;
  if (cert.grid_d) j["grid_d"] = *cert.grid_d;
  return j;
}

}  // namespace mpe::io
