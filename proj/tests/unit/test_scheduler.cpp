#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "doctest.h"
#include "dfc/scheduler.hpp"

using namespace dfc;

namespace {

// Independent largest-remainder apportionment: hand out whole quotas, then
// one seed at a time to the largest fractional part (lowest index on ties),
// then enforce the floor of one by taking from the largest holder.
std::vector<int> reference_apportion(const std::vector<double>& w, int total) {
  double sum = 0.0;
  for (double x : w) sum += x;
  std::vector<int> out(w.size());
  std::vector<std::pair<double, std::size_t>> rem;
  int given = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double q = total * w[i] / sum;
    out[i] = static_cast<int>(q);
    given += out[i];
    rem.push_back({q - out[i], i});
  }
  std::stable_sort(rem.begin(), rem.end(), [](auto& a, auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; given < total; ++k, ++given) out[rem[k % rem.size()].second]++;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] > 0 && out[i] == 0) {
      auto it = std::max_element(out.begin(), out.end());
      if (*it <= 1) break;
      --*it;
      out[i] = 1;
    }
  }
  return out;
}

}  // namespace

TEST_SUITE("scheduler") {
  TEST_CASE("mps weight examples with the default mixture") {
    const MpsConfig cfg;
    CHECK(std::abs(mps_weight(0.0, cfg) - 0.2) <= 1e-12);
    CHECK(std::abs(mps_weight(1.0, cfg) - 0.02) <= 1e-12);
    CHECK(std::abs(mps_weight(0.5, cfg) - 0.3) <= 1e-12);
    CHECK_THROWS_AS(mps_weight(1.2, cfg), SchedulerError);
    CHECK_THROWS_AS(mps_weight(-0.1, cfg), SchedulerError);
  }

  TEST_CASE("mps config validation") {
    MpsConfig cfg;
    cfg.a = 0.0;
    cfg.b = 0.0;
    CHECK_THROWS_AS(cfg.validate(), SchedulerError);
    cfg = MpsConfig{};
    cfg.eps1 = 0.0;
    CHECK_THROWS_AS(cfg.validate(), SchedulerError);
    cfg = MpsConfig{};
    cfg.seeds_per_game = 0;
    CHECK_THROWS_AS(cfg.validate(), SchedulerError);
  }

  TEST_CASE("allocation favours games with low or mid win rates") {
    const MpsConfig cfg;
    const WinRateTable t = {{"a", 0.0}, {"b", 0.5}, {"c", 1.0}};
    const auto s = allocate_seeds(t, cfg, 52);
    CHECK(s.at("a") + s.at("b") + s.at("c") == 52);
    CHECK(s.at("b") == 30);
    CHECK(s.at("a") == 20);
    CHECK(s.at("c") == 2);
  }

  TEST_CASE("property: random tables allocate the exact budget with at least one seed each") {
    Rng rng(77);
    const MpsConfig cfg;
    for (int trial = 0; trial < 1000; ++trial) {
      const int n = 1 + static_cast<int>(uniform_index(rng, 8));
      WinRateTable t;
      for (int i = 0; i < n; ++i) t["g" + std::to_string(i)] = uniform01(rng);
      const int budget = n + static_cast<int>(uniform_index(rng, 400));
      const auto alloc = allocate_seeds(t, cfg, budget);
      int sum = 0;
      for (const auto& [g, c] : alloc) {
        CHECK(c >= 1);
        sum += c;
      }
      CHECK(sum == budget);
    }
  }

  TEST_CASE("property: apportion matches the reference") {
    Rng rng(78);
    for (int trial = 0; trial < 500; ++trial) {
      const std::size_t n = 1 + uniform_index(rng, 6);
      std::vector<double> w(n);
      for (double& x : w) x = uniform01(rng) < 0.15 ? 0.0 : uniform01(rng);
      if (std::accumulate(w.begin(), w.end(), 0.0) <= 0.0) w[0] = 1.0;
      const int total = static_cast<int>(uniform_index(rng, 60));
      CHECK(apportion(w, total) == reference_apportion(w, total));
    }
  }

  TEST_CASE("apportion edge cases") {
    const std::vector<double> zeros = {0.0, 0.0};
    CHECK_THROWS_AS(apportion(zeros, 4), SchedulerError);
    const std::vector<double> w = {1.0, 1.0, 1.0};
    CHECK(apportion(w, 0) == std::vector<int>{0, 0, 0});
    CHECK(apportion(w, 2) == std::vector<int>{1, 1, 0});
    CHECK_THROWS_AS(allocate_seeds(WinRateTable{}, MpsConfig{}), SchedulerError);
  }

  TEST_CASE("uniform allocation splits evenly") {
    const auto a = allocate_uniform({"x", "y", "z"}, 150);
    CHECK(a.at("x") == 50);
    CHECK(a.at("y") == 50);
    CHECK(a.at("z") == 50);
    const auto b = allocate_uniform({"x", "y", "z"}, 151);
    CHECK(b.at("x") + b.at("y") + b.at("z") == 151);
    CHECK_THROWS_AS(allocate_uniform({}, 10), SchedulerError);
  }

  TEST_CASE("default budget is seeds_per_game times the number of games") {
    MpsConfig cfg;
    cfg.seeds_per_game = 7;
    const auto a = allocate_seeds({{"a", 0.3}, {"b", 0.9}}, cfg);
    CHECK(a.at("a") + a.at("b") == 14);
  }

  TEST_CASE("half-negative filter example") {
    Rng rng(3);
    const std::vector<double> r = {-1, -1, -1, -1, -1, 0.5, 0.5, 0.5, 0.5, 0.5};
    const auto keep = half_negative_keep(r, rng);
    CHECK(keep.size() == 8);
    int negatives = 0;
    for (auto i : keep) negatives += r[i] < 0;
    CHECK(negatives == 3);
  }

  TEST_CASE("property: half-negative filter drops exactly floor(n_neg / 2) negatives") {
    Rng gen(99);
    Rng rng(100);
    for (int trial = 0; trial < 1000; ++trial) {
      const std::size_t n = uniform_index(gen, 40);
      std::vector<double> r(n);
      for (double& x : r) {
        const auto k = uniform_index(gen, 3);
        x = k == 0 ? -1.0 - uniform01(gen) : (k == 1 ? 0.0 : uniform01(gen));
      }
      const auto n_neg = static_cast<std::size_t>(std::count_if(r.begin(), r.end(), [](double x) { return x < 0; }));
      const auto keep = half_negative_keep(r, rng);
      CHECK(keep.size() == n - n_neg / 2);
      CHECK(std::is_sorted(keep.begin(), keep.end()));
      CHECK(std::adjacent_find(keep.begin(), keep.end()) == keep.end());
      std::set<std::size_t> kept(keep.begin(), keep.end());
      for (std::size_t i = 0; i < n; ++i) {
        if (r[i] >= 0) CHECK(kept.count(i) == 1);
      }
    }
  }

  TEST_CASE("half-negative filter drops every negative with equal probability") {
    Rng rng(5);
    const std::vector<double> r = {-1, -1, -1, -1};
    std::array<int, 4> kept{};
    for (int i = 0; i < 8000; ++i) {
      for (auto k : half_negative_keep(r, rng)) kept[k]++;
    }
    for (int c : kept) CHECK(std::abs(c / 8000.0 - 0.5) <= 0.03);
  }

  TEST_CASE("generic filter keeps items aligned with rewards") {
    Rng rng(6);
    const std::vector<std::pair<int, double>> items = {{0, -1}, {1, 1}, {2, -1}, {3, 0}};
    const auto kept = half_negative_filter(items, [](const auto& p) { return p.second; }, rng);
    CHECK(kept.size() == 3);
  }

  TEST_CASE("rollout seeds are distinct and reproducible") {
    Rng a(11);
    Rng b(11);
    const auto s1 = draw_rollout_seeds("tictactoe", 500, a);
    const auto s2 = draw_rollout_seeds("tictactoe", 500, b);
    CHECK(s1 == s2);
    CHECK(std::set<std::uint64_t>(s1.begin(), s1.end()).size() == 500);
    Rng c(11);
    CHECK(draw_rollout_seeds("connect4", 500, c) != s1);
    CHECK_THROWS_AS(draw_rollout_seeds("x", -1, a), SchedulerError);
  }
}
