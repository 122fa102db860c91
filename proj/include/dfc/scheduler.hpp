#pragma once

// Curriculum seed allocation (mixed prioritized sampling), half-negative
// filtering and rollout seed draws.

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dfc/rng.hpp"

namespace dfc {

class SchedulerError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// game_id -> win rate in [0, 1]
using WinRateTable = std::map<std::string, double>;

struct MpsConfig {
  double a = 0.2;     // linear-capped priority weight
  double b = 0.8;     // variance priority weight
  double eps1 = 0.1;  // cap on 1 - WR, the minimum sampling share
  int seeds_per_game = 50;

  void validate() const;
};

// a * max(eps1, 1 - wr) + b * wr * (1 - wr)
double mps_weight(double wr, const MpsConfig& cfg);

// Splits `total_budget` seeds proportionally to mps_weight, rounding by
// largest remainder, with at least one seed for every positive-weight game.
std::map<std::string, int> allocate_seeds(const WinRateTable& table, const MpsConfig& cfg,
                                          int total_budget);
// Budget defaults to seeds_per_game * |table|.
std::map<std::string, int> allocate_seeds(const WinRateTable& table, const MpsConfig& cfg);

// Equal split of the same budget, used when prioritized sampling is disabled.
std::map<std::string, int> allocate_uniform(const std::vector<std::string>& games, int total_budget);

// Largest-remainder apportionment of `total` over non-negative weights,
// guaranteeing >= 1 to every positive weight when total allows it.
std::vector<int> apportion(std::span<const double> weights, int total);

// Indices (ascending) of the items kept after discarding floor(n_neg / 2)
// uniformly chosen negatives (reward < 0). Non-negatives are always kept.
std::vector<std::size_t> half_negative_keep(std::span<const double> rewards, Rng& rng);

template <typename T, typename RewardOf>
std::vector<T> half_negative_filter(std::vector<T> items, RewardOf reward_of, Rng& rng) {
  std::vector<double> rewards;
  rewards.reserve(items.size());
  for (const auto& item : items) rewards.push_back(reward_of(item));
  std::vector<T> kept;
  for (std::size_t i : half_negative_keep(rewards, rng)) kept.push_back(std::move(items[i]));
  return kept;
}

// `count` distinct pseudo-random seeds for one game, reproducible from the
// state of `master_rng`.
std::vector<std::uint64_t> draw_rollout_seeds(const std::string& game_id, int count, Rng& master_rng);

}  // namespace dfc
