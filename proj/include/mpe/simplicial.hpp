#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mpe/certify.hpp"
#include "mpe/game.hpp"
#include "mpe/nash_map.hpp"
#include "mpe/parallel.hpp"

namespace mpe {

/// Exhaustive routines refuse grids with more points than this.
inline constexpr double kGridGuard = 1e7;
/// Displacements within this distance of the minimum count as tied.
inline constexpr double kLabelTieTol = 1e-12;

/// A point of the regular grid: each (player, state) row of numerators sums to d.
struct GridProfile {
  int d = 1;
  ProfileArray<int> numerators;

  StrategyProfile to_profile() const {
    StrategyProfile pi(numerators.action_counts(), numerators.num_states());
    auto src = numerators.flat();
    auto dst = pi.flat();
    for (std::size_t k = 0; k < src.size(); ++k) dst[k] = static_cast<double>(src[k]) / d;
    return pi;
  }

  bool operator==(const GridProfile&) const = default;
};

using Label = Coordinate;

inline bool on_grid(const GridProfile& p) {
  for (int i = 0; i < p.numerators.num_players(); ++i) {
    for (int s = 0; s < p.numerators.num_states(); ++s) {
      int sum = 0;
      for (int v : p.numerators.row(i, s)) {
        if (v < 0) return false;
        sum += v;
      }
      if (sum != p.d) return false;
    }
  }
  return true;
}

inline void validate_grid_profile(const StochasticGame& game, const GridProfile& p) {
  detail::require(p.d >= 1, "grid size d must be >= 1");
  detail::require(p.numerators.action_counts() == game.action_counts() &&
                      p.numerators.num_states() == game.num_states(),
                  "grid point shape does not match the game");
  detail::require(on_grid(p), "point is not on the grid of size " + std::to_string(p.d));
}

// --- the grid ----------------------------------------------------------------

inline double binomial(int n, int k) {
  double r = 1.0;
  for (int j = 1; j <= k; ++j) r = r * (n - k + j) / j;
  return std::round(r);
}

/// Number of points of the product grid: prod over (i, s) of C(d + A^i - 1, A^i - 1).
inline double grid_size(const StochasticGame& game, int d) {
  double total = 1.0;
  for (int p = 0; p < game.num_players(); ++p) {
    const double per = binomial(d + game.num_actions(p) - 1, game.num_actions(p) - 1);
    total *= std::pow(per, game.num_states());
  }
  return total;
}

namespace detail {

/// Lexicographic successor among compositions of the row's sum; false at the last.
inline bool next_composition(std::span<int> row) {
  const int A = static_cast<int>(row.size());
  if (A <= 1) return false;
  // The last composition is (d, 0, ..., 0); find the rightmost position
  // before the tail that can still grow.
  const int tail = row[static_cast<std::size_t>(A - 1)];
  int k = A - 2;
  if (tail == 0) {
    while (k >= 0 && row[static_cast<std::size_t>(k)] == 0) --k;
    if (k <= 0) return false;
    // row = (..., x_{k-1}, x_k > 0, 0, ..., 0): move one unit left and reset tail.
    const int moved = row[static_cast<std::size_t>(k)];
    row[static_cast<std::size_t>(k - 1)] += 1;
    row[static_cast<std::size_t>(k)] = 0;
    row[static_cast<std::size_t>(A - 1)] = moved - 1;
    return true;
  }
  row[static_cast<std::size_t>(A - 2)] += 1;
  row[static_cast<std::size_t>(A - 1)] = tail - 1;
  return true;
}

inline void require_grid(const StochasticGame& game, int d) {
  require(d >= 1, "grid size d must be >= 1");
  const double size = grid_size(game, d);
  if (size > kGridGuard) {
    throw TooLarge("grid has " + std::to_string(size) + " points, above the exhaustive guard");
  }
}

}  // namespace detail

/// Visits every grid point once, in lexicographic order of the flat numerators.
/// Stops early when fn returns false.
inline void for_each_grid_point(const StochasticGame& game, int d,
                                const std::function<bool(const GridProfile&)>& fn) {
  detail::require_grid(game, d);
  GridProfile point{d, ProfileArray<int>(game.action_counts(), game.num_states(), 0)};
  std::vector<std::pair<int, int>> blocks;
  for (int p = 0; p < game.num_players(); ++p) {
    for (int s = 0; s < game.num_states(); ++s) {
      blocks.emplace_back(p, s);
      point.numerators.row(p, s).back() = d;
    }
  }
  while (true) {
    if (!fn(point)) return;
    int b = static_cast<int>(blocks.size()) - 1;
    for (; b >= 0; --b) {
      auto [p, s] = blocks[static_cast<std::size_t>(b)];
      auto row = point.numerators.row(p, s);
      if (detail::next_composition(row)) break;
      std::ranges::fill(row, 0);
      row.back() = d;
    }
    if (b < 0) return;
  }
}

inline std::vector<GridProfile> grid_points(const StochasticGame& game, int d) {
  std::vector<GridProfile> out;
  for_each_grid_point(game, d, [&](const GridProfile& p) {
    out.push_back(p);
    return true;
  });
  return out;
}

/// Grid point nearest the uniform profile. Every (player, state) row gets
/// floor(d / A) per action; the remainder goes to the last actions, which is
/// the lexicographically least of the equally near candidates.
inline GridProfile starting_point(const StochasticGame& game, int d) {
  detail::require(d >= 1, "grid size d must be >= 1");
  GridProfile v0{d, ProfileArray<int>(game.action_counts(), game.num_states(), 0)};
  for (int p = 0; p < game.num_players(); ++p) {
    const int A = game.num_actions(p);
    for (int s = 0; s < game.num_states(); ++s) {
      auto row = v0.numerators.row(p, s);
      std::ranges::fill(row, d / A);
      for (int k = 0; k < d % A; ++k) row[static_cast<std::size_t>(A - 1 - k)] += 1;
    }
  }
  return v0;
}

// --- triangulation -------------------------------------------------------------

/// Column (i, s, a) of the block-diagonal matrix Q: -1 at action a, +1 at action
/// (a + 1) mod A^i, within player i's row at state s.
inline ProfileArray<int> q_column(const StochasticGame& game, const Coordinate& coord) {
  ProfileArray<int> column(game.action_counts(), game.num_states(), 0);
  detail::require(column.valid(coord), "invalid coordinate for Q column");
  const int A = game.num_actions(coord.player);
  if (A == 1) return column;
  column(coord.player, coord.state, coord.action) -= 1;
  column(coord.player, coord.state, (coord.action + 1) % A) += 1;
  return column;
}

/// The A x A cyclic block Q_A, row-major.
inline std::vector<std::vector<int>> q_block(int A) {
  std::vector<std::vector<int>> q(static_cast<std::size_t>(A), std::vector<int>(static_cast<std::size_t>(A), 0));
  if (A == 1) return q;
  for (int k = 0; k < A; ++k) {
    q[static_cast<std::size_t>(k)][static_cast<std::size_t>(k)] -= 1;
    q[static_cast<std::size_t>((k + 1) % A)][static_cast<std::size_t>(k)] += 1;
  }
  return q;
}

namespace detail {

inline void add_q_column(ProfileArray<int>& x, const Coordinate& c) {
  const int A = x.num_actions(c.player);
  if (A == 1) return;
  x(c.player, c.state, c.action) -= 1;
  x(c.player, c.state, (c.action + 1) % A) += 1;
}

}  // namespace detail

/// True when every (player, state) keeps at least one of its coordinates out of T.
inline bool is_admissible_index_set(const StochasticGame& game, std::span<const Coordinate> T) {
  ProfileArray<int> count(game.action_counts(), game.num_states(), 0);
  for (const auto& c : T) {
    if (!count.valid(c) || count[c] != 0) return false;
    count[c] = 1;
  }
  for (int p = 0; p < game.num_players(); ++p) {
    for (int s = 0; s < game.num_states(); ++s) {
      int used = 0;
      for (int v : count.row(p, s)) used += v;
      if (used == game.num_actions(p)) return false;
    }
  }
  return true;
}

/// Minimal nonnegative coefficients c with x = v0 + sum c(t) Q(t), where each
/// (player, state) row keeps at least one zero coefficient. Such c always
/// exists and is unique; x lies in A(T) iff supp(c) is inside T and T is
/// admissible. Units are 1/d.
inline ProfileArray<int> cone_coefficients(const GridProfile& v0, const GridProfile& x) {
  detail::require(v0.d == x.d && v0.numerators.same_shape(x.numerators), "grid mismatch");
  ProfileArray<int> coeff(x.numerators.action_counts(), x.numerators.num_states(), 0);
  for (int p = 0; p < x.numerators.num_players(); ++p) {
    const int A = x.numerators.num_actions(p);
    for (int s = 0; s < x.numerators.num_states(); ++s) {
      // Row r of Q c equals c(r-1) - c(r), so c(r) = c(r-1) - y(r).
      auto out = coeff.row(p, s);
      auto xv = x.numerators.row(p, s);
      auto vv = v0.numerators.row(p, s);
      long long running = 0;
      std::vector<long long> raw(static_cast<std::size_t>(A));
      for (int r = 1; r < A; ++r) {
        running -= xv[static_cast<std::size_t>(r)] - vv[static_cast<std::size_t>(r)];
        raw[static_cast<std::size_t>(r)] = running;
      }
      const long long lo = *std::min_element(raw.begin(), raw.end());
      for (int r = 0; r < A; ++r) {
        out[static_cast<std::size_t>(r)] = static_cast<int>(raw[static_cast<std::size_t>(r)] - lo);
      }
    }
  }
  return coeff;
}

inline bool in_region(const StochasticGame& game, const GridProfile& v0,
                      std::span<const Coordinate> T, const GridProfile& x) {
  if (!is_admissible_index_set(game, T)) return false;
  const ProfileArray<int> coeff = cone_coefficients(v0, x);
  ProfileArray<int> allowed(game.action_counts(), game.num_states(), 0);
  for (const auto& c : T) allowed[c] = 1;
  auto cf = coeff.flat();
  auto al = allowed.flat();
  for (std::size_t k = 0; k < cf.size(); ++k) {
    if (cf[k] > 0 && al[k] == 0) return false;
  }
  return true;
}

/// Simplex Delta(w0, phi): vertices w^k = w^{k-1} + Q(phi(k)), with
/// phi(k) = index_set[permutation[k - 1]].
struct GridSimplex {
  GridProfile base;
  std::vector<Coordinate> index_set;  // T, sorted
  std::vector<int> permutation;       // positions into index_set

  bool operator==(const GridSimplex&) const = default;
};

/// w^0 .. w^{|T|}; throws InvalidInput if a vertex leaves the grid.
inline std::vector<GridProfile> simplex_vertices(const StochasticGame& game,
                                                 const GridSimplex& sigma) {
  validate_grid_profile(game, sigma.base);
  detail::require(sigma.permutation.size() == sigma.index_set.size(),
                  "permutation length must equal |T|");
  std::vector<int> seen(sigma.index_set.size(), 0);
  for (int k : sigma.permutation) {
    detail::require(k >= 0 && k < static_cast<int>(seen.size()) && !seen[static_cast<std::size_t>(k)],
                    "permutation is not a permutation of T");
    seen[static_cast<std::size_t>(k)] = 1;
  }
  std::vector<GridProfile> vertices{sigma.base};
  for (std::size_t k = 0; k < sigma.permutation.size(); ++k) {
    const Coordinate& c = sigma.index_set[static_cast<std::size_t>(sigma.permutation[k])];
    detail::require(sigma.base.numerators.valid(c), "invalid coordinate in T");
    GridProfile next = vertices.back();
    detail::add_q_column(next.numerators, c);
    detail::require(on_grid(next), "simplex vertex " + std::to_string(k + 1) + " leaves the grid");
    vertices.push_back(std::move(next));
  }
  return vertices;
}

// --- labelling -----------------------------------------------------------------

/// Lexicographically least coordinate with positive probability among those
/// attaining the smallest displacement f(pi) - pi.
inline Label label_profile(const StochasticGame& game, const StrategyProfile& pi) {
  const StrategyProfile image = apply_f(game, pi);
  auto src = pi.flat();
  auto dst = image.flat();
  double lowest = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < src.size(); ++k) lowest = std::min(lowest, dst[k] - src[k]);
  std::optional<std::size_t> fallback;
  for (std::size_t k = 0; k < src.size(); ++k) {
    if (src[k] <= 0.0) continue;
    const double disp = dst[k] - src[k];
    if (disp <= lowest + kLabelTieTol) return pi.coordinate(k);
    if (!fallback || disp < dst[*fallback] - src[*fallback]) fallback = k;
  }
  return pi.coordinate(*fallback);
}

inline Label label_point(const StochasticGame& game, const GridProfile& p) {
  validate_grid_profile(game, p);
  return label_profile(game, p.to_profile());
}

namespace detail {

struct VectorHash {
  std::size_t operator()(std::span<const int> v) const noexcept {
    std::size_t h = 0xcbf29ce484222325ULL;
    for (int x : v) h = (h ^ static_cast<std::size_t>(x)) * 0x100000001b3ULL;
    return h;
  }
  std::size_t operator()(const std::vector<int>& v) const noexcept {
    return (*this)(std::span<const int>(v));
  }
};

}  // namespace detail

/// Memoized grid labels; labels are pure functions of the point.
class LabelCache {
 public:
  explicit LabelCache(const StochasticGame& game) : game_(&game) {}

  Label get(const GridProfile& p) {
    std::vector<int> key(p.numerators.flat().begin(), p.numerators.flat().end());
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    const Label l = label_profile(*game_, p.to_profile());
    cache_.emplace(std::move(key), l);
    return l;
  }

  /// Labels the whole grid up front, in parallel.
  void precompute(int d) {
    const auto points = grid_points(*game_, d);
    std::vector<Label> labels(points.size());
    parallel_for(points.size(),
                 [&](std::size_t k) { labels[k] = label_profile(*game_, points[k].to_profile()); });
    for (std::size_t k = 0; k < points.size(); ++k) {
      auto flat = points[k].numerators.flat();
      cache_.emplace(std::vector<int>(flat.begin(), flat.end()), labels[k]);
    }
  }

 private:
  const StochasticGame* game_;
  std::unordered_map<std::vector<int>, Label, detail::VectorHash> cache_;
};

// --- classification --------------------------------------------------------------

enum class SimplexKind { kIncomplete, kCompletelyLabelled, kStopping };

struct SimplexClass {
  SimplexKind kind = SimplexKind::kIncomplete;
  int player = -1;  // stopping (player, state), the lexicographically least
  int state = -1;
  std::vector<Label> labels;
};

inline SimplexClass classify_labels(const StochasticGame& game, std::vector<Label> labels) {
  SimplexClass out;
  out.labels = labels;
  std::ranges::sort(labels);
  if (std::adjacent_find(labels.begin(), labels.end()) != labels.end()) return out;
  out.kind = SimplexKind::kCompletelyLabelled;
  for (int p = 0; p < game.num_players(); ++p) {
    for (int s = 0; s < game.num_states(); ++s) {
      int covered = 0;
      for (const auto& l : labels) covered += (l.player == p && l.state == s);
      if (covered == game.num_actions(p)) {
        out.kind = SimplexKind::kStopping;
        out.player = p;
        out.state = s;
        return out;
      }
    }
  }
  return out;
}

inline SimplexClass classify_simplex(const StochasticGame& game, const GridSimplex& sigma) {
  std::vector<Label> labels;
  for (const auto& v : simplex_vertices(game, sigma)) labels.push_back(label_point(game, v));
  return classify_labels(game, std::move(labels));
}

inline std::string to_string(SimplexKind kind) {
  switch (kind) {
    case SimplexKind::kIncomplete:
      return "incomplete";
    case SimplexKind::kCompletelyLabelled:
      return "completely-labelled";
    case SimplexKind::kStopping:
      return "stopping";
  }
  return "unknown";
}

// --- exhaustive search --------------------------------------------------------------

namespace detail {

struct IndexSet {
  std::vector<int> flat;  // sorted flat coordinate indices
  std::uint64_t mask = 0;
};

/// Every admissible T, ordered by size and then lexicographically.
inline std::vector<IndexSet> admissible_index_sets(const StochasticGame& game) {
  const ProfileArray<int> shape(game.action_counts(), game.num_states(), 0);
  if (shape.size() > 64) throw TooLarge("more than 64 coordinates");
  double count = 1.0;
  for (int p = 0; p < game.num_players(); ++p) {
    count *= std::pow(std::pow(2.0, game.num_actions(p)) - 1.0, game.num_states());
  }
  if (count > 1e6) throw TooLarge("too many index sets to enumerate");
  std::vector<IndexSet> sets{IndexSet{}};
  for (int p = 0; p < game.num_players(); ++p) {
    const int A = game.num_actions(p);
    for (int s = 0; s < game.num_states(); ++s) {
      std::vector<IndexSet> grown;
      for (const auto& base : sets) {
        for (std::uint32_t sub = 0; sub < (1u << A) - 1u; ++sub) {
          IndexSet t = base;
          for (int a = 0; a < A; ++a) {
            if (sub & (1u << a)) {
              const auto idx = shape.index(p, s, a);
              t.flat.push_back(static_cast<int>(idx));
              t.mask |= std::uint64_t{1} << idx;
            }
          }
          grown.push_back(std::move(t));
        }
      }
      sets = std::move(grown);
    }
  }
  std::ranges::sort(sets, [](const IndexSet& a, const IndexSet& b) {
    if (a.flat.size() != b.flat.size()) return a.flat.size() < b.flat.size();
    return a.flat < b.flat;
  });
  return sets;
}

}  // namespace detail

/// Visits every simplex of Sigma (all admissible T, all w0 in A(T) on the grid,
/// all orderings phi whose vertices stay on the grid). Order: base point
/// lexicographic, then |T|, then T lexicographic, then phi lexicographic.
/// fn(sigma, vertices) returns false to stop.
inline void for_each_simplex(
    const StochasticGame& game, int d, const GridProfile& v0,
    const std::function<bool(const GridSimplex&, const std::vector<GridProfile>&)>& fn) {
  detail::require_grid(game, d);
  validate_grid_profile(game, v0);
  detail::require(v0.d == d, "starting point is on a different grid");
  const auto sets = detail::admissible_index_sets(game);
  bool stop = false;
  for_each_grid_point(game, d, [&](const GridProfile& base) {
    const ProfileArray<int> coeff = cone_coefficients(v0, base);
    std::uint64_t required = 0;
    auto cf = coeff.flat();
    for (std::size_t k = 0; k < cf.size(); ++k) {
      if (cf[k] > 0) required |= std::uint64_t{1} << k;
    }
    GridSimplex sigma{base, {}, {}};
    std::vector<GridProfile> vertices;
    for (const auto& T : sets) {
      if ((T.mask & required) != required) continue;
      const std::size_t k = T.flat.size();
      sigma.index_set.clear();
      for (int idx : T.flat) sigma.index_set.push_back(base.numerators.coordinate(static_cast<std::size_t>(idx)));
      sigma.permutation.resize(k);
      std::iota(sigma.permutation.begin(), sigma.permutation.end(), 0);
      do {
        vertices.assign(1, base);
        std::size_t broken = k;
        for (std::size_t step = 0; step < k; ++step) {
          GridProfile next = vertices.back();
          detail::add_q_column(next.numerators,
                               sigma.index_set[static_cast<std::size_t>(sigma.permutation[step])]);
          if (!on_grid(next)) {
            broken = step;
            break;
          }
          vertices.push_back(std::move(next));
        }
        if (broken < k) {
          // Every ordering sharing this prefix fails at the same step.
          std::sort(sigma.permutation.begin() + static_cast<std::ptrdiff_t>(broken) + 1,
                    sigma.permutation.end(), std::greater<>());
          continue;
        }
        if (!fn(sigma, vertices)) {
          stop = true;
          return false;
        }
      } while (std::next_permutation(sigma.permutation.begin(), sigma.permutation.end()));
    }
    return !stop;
  });
}

struct StoppingSimplex {
  GridSimplex simplex;
  SimplexClass classification;
};

namespace detail {

inline bool could_stop(const StochasticGame& game, std::size_t vertex_count) {
  return static_cast<int>(vertex_count) >=
         *std::min_element(game.action_counts().begin(), game.action_counts().end());
}

}  // namespace detail

/// First stopping simplex of Sigma in enumeration order, if any.
inline std::optional<StoppingSimplex> find_stopping_simplex(const StochasticGame& game, int d,
                                                            std::optional<GridProfile> v0 = {}) {
  const GridProfile start = v0 ? *v0 : starting_point(game, d);
  LabelCache labels(game);
  std::optional<StoppingSimplex> found;
  for_each_simplex(game, d, start, [&](const GridSimplex& sigma, const std::vector<GridProfile>& vs) {
    if (!detail::could_stop(game, vs.size())) return true;
    std::vector<Label> ls;
    for (const auto& v : vs) ls.push_back(labels.get(v));
    SimplexClass cls = classify_labels(game, std::move(ls));
    if (cls.kind != SimplexKind::kStopping) return true;
    found = StoppingSimplex{sigma, std::move(cls)};
    return false;
  });
  return found;
}

/// Every stopping simplex of Sigma, in enumeration order.
inline std::vector<StoppingSimplex> stopping_simplices(const StochasticGame& game, int d,
                                                       std::optional<GridProfile> v0 = {}) {
  const GridProfile start = v0 ? *v0 : starting_point(game, d);
  LabelCache labels(game);
  labels.precompute(d);
  std::vector<StoppingSimplex> out;
  for_each_simplex(game, d, start, [&](const GridSimplex& sigma, const std::vector<GridProfile>& vs) {
    if (!detail::could_stop(game, vs.size())) return true;
    std::vector<Label> ls;
    for (const auto& v : vs) ls.push_back(labels.get(v));
    SimplexClass cls = classify_labels(game, std::move(ls));
    if (cls.kind == SimplexKind::kStopping) out.push_back({sigma, std::move(cls)});
    return true;
  });
  return out;
}

/// A_max^2 (lambda + 1) / d.
inline double stopping_residual_bound(const StochasticGame& game, int d) {
  const double A = game.max_actions();
  return A * A * (lipschitz_constant(game) + 1.0) / d;
}

struct StoppingResidualReport {
  double bound = 0.0;
  std::vector<double> vertex_residuals;
  double max_residual = 0.0;
  bool pass = false;
};

/// Checks residual(pi) <= A_max^2 (lambda + 1) / d at every vertex of a
/// stopping simplex. Throws InvalidInput when sigma is not stopping.
inline StoppingResidualReport stopping_residual_check(const StochasticGame& game,
                                                      const GridSimplex& sigma, int d,
                                                      double slack = 1e-8) {
  detail::require(sigma.base.d == d, "simplex lives on a different grid");
  const SimplexClass cls = classify_simplex(game, sigma);
  detail::require(cls.kind == SimplexKind::kStopping, "simplex is not stopping");
  StoppingResidualReport report;
  report.bound = stopping_residual_bound(game, d);
  for (const auto& v : simplex_vertices(game, sigma)) {
    const double r = residual(game, v.to_profile());
    report.vertex_residuals.push_back(r);
    report.max_residual = std::max(report.max_residual, r);
  }
  report.pass = report.max_residual <= report.bound + slack;
  return report;
}

}  // namespace mpe
