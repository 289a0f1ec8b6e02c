#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "mpe/error.hpp"

namespace mpe {

/// One coordinate (i, s, a^i) of the strategy space. The default ordering is
/// lexicographic in (player, state, action), which is also the order of the
/// flat storage of ProfileArray.
struct Coordinate {
  int player = 0;
  int state = 0;
  int action = 0;

  auto operator<=>(const Coordinate&) const = default;
};

/// Dense per-(player, state, action) storage laid out player-major, then
/// state, then action. Used for mixed strategies, grid numerators and gain
/// tables alike.
template <class T>
class ProfileArray {
 public:
  ProfileArray() = default;

  ProfileArray(std::vector<int> action_counts, int num_states, T fill = T{})
      : counts_(std::move(action_counts)), num_states_(num_states) {
    detail::require(num_states_ >= 1, "profile needs at least one state");
    player_offset_.reserve(counts_.size() + 1);
    std::size_t offset = 0;
    for (int count : counts_) {
      detail::require(count >= 1, "every player needs at least one action");
      player_offset_.push_back(offset);
      offset += static_cast<std::size_t>(count) * static_cast<std::size_t>(num_states_);
    }
    player_offset_.push_back(offset);
    data_.assign(offset, fill);
  }

  int num_players() const { return static_cast<int>(counts_.size()); }
  int num_states() const { return num_states_; }
  int num_actions(int player) const { return counts_[static_cast<std::size_t>(player)]; }
  const std::vector<int>& action_counts() const { return counts_; }
  std::size_t size() const { return data_.size(); }

  std::size_t offset(int player, int state) const {
    return player_offset_[static_cast<std::size_t>(player)] +
           static_cast<std::size_t>(state) * static_cast<std::size_t>(num_actions(player));
  }
  std::size_t index(int player, int state, int action) const {
    return offset(player, state) + static_cast<std::size_t>(action);
  }
  std::size_t index(const Coordinate& c) const { return index(c.player, c.state, c.action); }

  Coordinate coordinate(std::size_t flat_index) const {
    auto it = std::upper_bound(player_offset_.begin(), player_offset_.end(), flat_index);
    const int player = static_cast<int>(it - player_offset_.begin()) - 1;
    const std::size_t local = flat_index - player_offset_[static_cast<std::size_t>(player)];
    const auto count = static_cast<std::size_t>(num_actions(player));
    return {player, static_cast<int>(local / count), static_cast<int>(local % count)};
  }

  bool valid(const Coordinate& c) const {
    return c.player >= 0 && c.player < num_players() && c.state >= 0 &&
           c.state < num_states_ && c.action >= 0 && c.action < num_actions(c.player);
  }

  T& operator()(int player, int state, int action) { return data_[index(player, state, action)]; }
  const T& operator()(int player, int state, int action) const {
    return data_[index(player, state, action)];
  }
  T& operator[](const Coordinate& c) { return data_[index(c)]; }
  const T& operator[](const Coordinate& c) const { return data_[index(c)]; }

  std::span<T> row(int player, int state) {
    return {data_.data() + offset(player, state), static_cast<std::size_t>(num_actions(player))};
  }
  std::span<const T> row(int player, int state) const {
    return {data_.data() + offset(player, state), static_cast<std::size_t>(num_actions(player))};
  }

  std::span<T> flat() { return data_; }
  std::span<const T> flat() const { return data_; }

  template <class U>
  bool same_shape(const ProfileArray<U>& other) const {
    return counts_ == other.action_counts() && num_states_ == other.num_states();
  }

  bool operator==(const ProfileArray&) const = default;

 private:
  std::vector<int> counts_;
  int num_states_ = 0;
  std::vector<std::size_t> player_offset_;
  std::vector<T> data_;
};

/// Behavioral strategy profile: one distribution per (player, state).
using StrategyProfile = ProfileArray<double>;

/// Max-norm distance over every (player, state, action) coordinate.
template <class T>
double max_abs_diff(const ProfileArray<T>& a, const ProfileArray<T>& b) {
  detail::require(a.same_shape(b), "profiles have different shapes");
  double worst = 0.0;
  auto fa = a.flat();
  auto fb = b.flat();
  for (std::size_t k = 0; k < fa.size(); ++k) {
    worst = std::max(worst, static_cast<double>(fa[k] > fb[k] ? fa[k] - fb[k] : fb[k] - fa[k]));
  }
  return worst;
}

}  // namespace mpe
