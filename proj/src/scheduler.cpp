#include "dfc/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

namespace dfc {

void MpsConfig::validate() const {
  if (!(a >= 0.0) || !(b >= 0.0)) throw SchedulerError("MPS weights a and b must be >= 0");
  if (!(a + b > 0.0)) throw SchedulerError("MPS weights must satisfy a + b > 0");
  if (!(eps1 > 0.0 && eps1 <= 1.0)) throw SchedulerError("MPS eps1 must lie in (0, 1]");
  if (seeds_per_game < 1) throw SchedulerError("seed budget per game must be >= 1");
}

double mps_weight(double wr, const MpsConfig& cfg) {
  if (!(wr >= 0.0 && wr <= 1.0)) throw SchedulerError("win rate must lie in [0, 1]");
  return cfg.a * std::max(cfg.eps1, 1.0 - wr) + cfg.b * wr * (1.0 - wr);
}

std::vector<int> apportion(std::span<const double> weights, int total) {
  const std::size_t n = weights.size();
  std::vector<int> counts(n, 0);
  if (n == 0 || total <= 0) return counts;
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(sum > 0.0)) throw SchedulerError("cannot allocate seeds: all weights are zero");

  std::vector<double> remainder(n);
  int assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double share = static_cast<double>(total) * weights[i] / sum;
    counts[i] = static_cast<int>(std::floor(share));
    remainder[i] = share - counts[i];
    assigned += counts[i];
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return remainder[x] > remainder[y]; });
  for (std::size_t k = 0; assigned < total; k = (k + 1) % n) {
    counts[order[k]] += 1;
    ++assigned;
  }

  // Floor of one seed for every positive-weight game, taken from the game
  // holding the most seeds.
  for (std::size_t i = 0; i < n; ++i) {
    if (weights[i] <= 0.0 || counts[i] > 0) continue;
    auto donor = std::max_element(counts.begin(), counts.end());
    if (*donor <= 1) break;  // budget smaller than the number of games
    *donor -= 1;
    counts[i] = 1;
  }
  return counts;
}

std::map<std::string, int> allocate_seeds(const WinRateTable& table, const MpsConfig& cfg,
                                          int total_budget) {
  if (table.empty()) throw SchedulerError("allocate_seeds: empty win-rate table");
  cfg.validate();
  std::vector<double> weights;
  weights.reserve(table.size());
  for (const auto& [game, wr] : table) weights.push_back(mps_weight(wr, cfg));
  const auto counts = apportion(weights, total_budget);
  std::map<std::string, int> out;
  std::size_t i = 0;
  for (const auto& [game, wr] : table) out[game] = counts[i++];
  return out;
}

std::map<std::string, int> allocate_seeds(const WinRateTable& table, const MpsConfig& cfg) {
  return allocate_seeds(table, cfg, cfg.seeds_per_game * static_cast<int>(table.size()));
}

std::map<std::string, int> allocate_uniform(const std::vector<std::string>& games, int total_budget) {
  if (games.empty()) throw SchedulerError("allocate_uniform: no games");
  const std::vector<double> weights(games.size(), 1.0);
  const auto counts = apportion(weights, total_budget);
  std::map<std::string, int> out;
  for (std::size_t i = 0; i < games.size(); ++i) out[games[i]] = counts[i];
  return out;
}

std::vector<std::size_t> half_negative_keep(std::span<const double> rewards, Rng& rng) {
  std::vector<std::size_t> negatives;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    if (rewards[i] < 0.0) negatives.push_back(i);
  }
  // Partial Fisher-Yates: the first floor(n/2) shuffled negatives are dropped.
  const std::size_t drop = negatives.size() / 2;
  for (std::size_t i = 0; i < drop; ++i) {
    const auto j = i + static_cast<std::size_t>(uniform_index(rng, negatives.size() - i));
    std::swap(negatives[i], negatives[j]);
  }
  std::vector<bool> dropped(rewards.size(), false);
  for (std::size_t i = 0; i < drop; ++i) dropped[negatives[i]] = true;
  std::vector<std::size_t> keep;
  keep.reserve(rewards.size() - drop);
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    if (!dropped[i]) keep.push_back(i);
  }
  return keep;
}

std::vector<std::uint64_t> draw_rollout_seeds(const std::string& game_id, int count, Rng& master_rng) {
  if (count < 0) throw SchedulerError("draw_rollout_seeds: count must be >= 0");
  const std::uint64_t salt = hash_string(game_id);
  std::vector<std::uint64_t> seeds;
  seeds.reserve(static_cast<std::size_t>(count));
  std::unordered_set<std::uint64_t> seen;
  while (static_cast<int>(seeds.size()) < count) {
    const std::uint64_t s = mix_seed(master_rng(), salt);
    if (seen.insert(s).second) seeds.push_back(s);
  }
  return seeds;
}

}  // namespace dfc
