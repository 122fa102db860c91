#include <algorithm>
#include <sstream>

#include "doctest.h"
#include "dfc/trainer.hpp"

using namespace dfc;

namespace {

Trajectory fake(const std::string& game, StepOutcome learner, std::vector<bool> learner_ok) {
  Trajectory t;
  t.game_id = game;
  t.learner_outcome = learner;
  for (bool ok : learner_ok) {
    PlayedStep s;
    s.learner = true;
    s.format_ok = ok;
    t.steps.push_back(s);
    PlayedStep o;  // an opponent step that never counts
    o.format_ok = false;
    t.steps.push_back(o);
  }
  t.n_steps = static_cast<int>(t.steps.size());
  return t;
}

RunConfig small_config() {
  RunConfig cfg;
  cfg.games = {"hanoi3", "tictactoe"};
  cfg.iterations = 3;
  cfg.seeds_per_game = 4;
  cfg.group_size = 4;
  cfg.gate_seeds = 4;
  return cfg;
}

std::string dump(const std::vector<IterationMetrics>& ms) {
  std::ostringstream os;
  os.precision(17);
  for (const auto& m : ms) {
    os << m.iteration << ' ' << m.mean_steps << ' ' << m.mean_reward << ' ' << m.loss << ' '
       << m.kl << ' ' << m.kept << ' ' << m.candidate_avg_wr << ' ' << m.best_avg_wr << ' '
       << m.accepted;
    for (const auto& [g, v] : m.wrc) os << ' ' << g << '=' << v;
    for (const auto& [g, v] : m.seeds) os << ' ' << g << '=' << v;
    os << '\n';
  }
  return os.str();
}

}  // namespace

TEST_SUITE("trainer") {
  TEST_CASE("rollout of r episodes on a single-player game") {
    const GameRegistry reg = register_builtin_games();
    const Featurizer f(256, 0);
    const PolicyParams p = init_params(256, 0);
    Rng rng(1);
    const auto batch = rollout_game(p, f, reg.find("hanoi3"), 7, 8, {}, rng);
    REQUIRE(batch.size() == 8);
    for (const auto& t : batch) {
      CHECK(t.game_id == "hanoi3");
      CHECK(t.seed == 7);
      CHECK(t.learner_role == 0);
      CHECK(t.learner_outcome != StepOutcome::Ongoing);
      CHECK(t.learner_steps.size() == static_cast<std::size_t>(t.learner_actions()));
    }
  }

  TEST_CASE("two-player rollouts alternate the learner seat") {
    const GameRegistry reg = register_builtin_games();
    const Featurizer f(256, 0);
    const PolicyParams p = init_params(256, 0);
    Rng rng(2);
    const auto batch = rollout_game(p, f, reg.find("tictactoe"), 3, 8, {}, rng);
    int seat0 = 0;
    for (const auto& t : batch) seat0 += t.learner_role == 0;
    CHECK(seat0 == 4);
    for (const auto& t : batch) {
      for (const auto& s : t.steps) CHECK(s.learner == (s.player == t.learner_role));
    }
    CHECK_THROWS(rollout_game(p, f, reg.find("tictactoe"), 3, 0, {}, rng));
  }

  TEST_CASE("rollouts are deterministic given the rng state") {
    const GameRegistry reg = register_builtin_games();
    const Featurizer f(256, 0);
    const PolicyParams p = init_params(256, 3);
    Rng a(9);
    Rng b(9);
    const auto x = rollout_game(p, f, reg.find("connect4"), 5, 4, {0.0, true}, a);
    const auto y = rollout_game(p, f, reg.find("connect4"), 5, 4, {0.0, true}, b);
    for (std::size_t i = 0; i < x.size(); ++i) {
      REQUIRE(x[i].steps.size() == y[i].steps.size());
      for (std::size_t k = 0; k < x[i].steps.size(); ++k) CHECK(x[i].steps[k].raw == y[i].steps[k].raw);
    }
  }

  TEST_CASE("property: trajectory invariants") {
    const GameRegistry reg = register_builtin_games();
    const Featurizer f(256, 0);
    const PolicyParams p = init_params(256, 4);
    Rng rng(10);
    for (const auto& id : reg.ids()) {
      for (int seed = 0; seed < 5; ++seed) {
        for (auto& t : rollout_game(p, f, reg.find(id), seed, 4, {0.2, true}, rng)) {
          CHECK(t.n_steps >= 1);
          CHECK(t.n_steps <= kDefaultMaxSteps);
          CHECK(static_cast<std::size_t>(t.n_steps) == t.steps.size());
          for (std::size_t k = 0; k + 1 < t.steps.size(); ++k) {
            CHECK(t.steps[k].format_ok);
            CHECK(t.steps[k].outcome == StepOutcome::Ongoing);
          }
          score_trajectory(t, {});
          const bool bad = t.learner_format_errors() > 0;
          CHECK((t.reward.r_format < 0) == bad);
          CHECK(t.scalar_reward >= -2.0);
          CHECK(t.scalar_reward <= 1.0);
          if (t.learner_outcome == StepOutcome::Win && !bad) {
            CHECK(t.scalar_reward == doctest::Approx(1.0 / t.n_steps));
          }
        }
      }
    }
  }

  TEST_CASE("format reward toggle and reward mode in scoring") {
    Trajectory t = fake("x", StepOutcome::Lose, {true, false});
    score_trajectory(t, {true, RewardMode::StepShaped});
    CHECK(t.scalar_reward == -2.0);
    score_trajectory(t, {false, RewardMode::StepShaped});
    CHECK(t.scalar_reward == -1.0);
    Trajectory w = fake("x", StepOutcome::Win, {true, true});
    score_trajectory(w, {true, RewardMode::StepShaped});
    CHECK(w.scalar_reward == 0.25);
    score_trajectory(w, {true, RewardMode::EnvOnly});
    CHECK(w.scalar_reward == 1.0);
  }

  TEST_CASE("win rate and good-format ratio") {
    std::vector<Trajectory> ts;
    for (int i = 0; i < 3; ++i) ts.push_back(fake("g", StepOutcome::Win, {true}));
    for (int i = 0; i < 2; ++i) ts.push_back(fake("g", StepOutcome::Draw, {true}));
    for (int i = 0; i < 3; ++i) ts.push_back(fake("g", StepOutcome::Lose, {true}));
    CHECK(compute_wrc(ts).at("g") == 0.375);

    std::vector<Trajectory> gf = {fake("h", StepOutcome::Lose, {true, true, true, true, true, true, true, true, true, false})};
    CHECK(compute_gf(gf).at("h") == 0.9);

    std::vector<Trajectory> empty = {fake("e", StepOutcome::Lose, {})};
    CHECK(compute_gf(empty).at("e") == 1.0);
  }

  TEST_CASE("all-equal rewards leave the policy unchanged") {
    const GameRegistry reg = register_builtin_games(3);
    RunConfig cfg;
    cfg.games = {"hanoi4"};
    cfg.iterations = 1;
    cfg.seeds_per_game = 3;
    cfg.group_size = 4;
    cfg.gate_seeds = 2;
    cfg.toggles.fr = false;
    const PolicyParams init = init_params(256, 0);
    PolicyParams candidate;
    ConquerOptions opts;
    opts.on_iteration = [&](const IterationMetrics&, const PolicyParams& c, const PolicyParams&) {
      candidate = c;
    };
    const auto res = conquer(reg, cfg.games, init, cfg, opts);
    REQUIRE(res.metrics.size() == 1);
    CHECK(candidate.theta == init.theta);
    CHECK(res.metrics[0].mean_reward == -1.0);
  }

  TEST_CASE("conquer runs exactly T iterations with a monotone best series") {
    const GameRegistry reg = register_builtin_games();
    const RunConfig cfg = small_config();
    const auto res = conquer(reg, cfg.games, init_params(256, 0), cfg);
    REQUIRE(res.metrics.size() == 3);
    double prev = res.baseline_avg_wr;
    for (const auto& m : res.metrics) {
      CHECK(m.best_avg_wr >= prev);
      CHECK(m.best_avg_wr >= m.candidate_avg_wr - (m.accepted ? 0.0 : 1.0));
      if (m.accepted) CHECK(m.best_avg_wr == m.candidate_avg_wr);
      prev = m.best_avg_wr;
    }
    CHECK(res.best.meta.lineage.back() == "conquer:run");
  }

  TEST_CASE("metrics carry every field for every game") {
    const GameRegistry reg = register_builtin_games();
    const RunConfig cfg = small_config();
    const auto res = conquer(reg, cfg.games, init_params(256, 0), cfg);
    for (const auto& m : res.metrics) {
      for (const auto& g : cfg.games) {
        CHECK(m.wrc.count(g) == 1);
        CHECK(m.gf.count(g) == 1);
        CHECK(m.gate_wr.count(g) == 1);
        CHECK(m.seeds.count(g) == 1);
      }
      int seeds = 0;
      for (const auto& [g, s] : m.seeds) seeds += s;
      CHECK(seeds == cfg.seeds_per_game * 2);
      CHECK(m.trajectories == seeds * cfg.group_size);
      CHECK(m.kept <= m.trajectories);
      CHECK(m.epsilon == cfg.epsilon);
    }
  }

  TEST_CASE("toggles are honoured") {
    const GameRegistry reg = register_builtin_games();
    RunConfig cfg = small_config();
    cfg.iterations = 2;
    cfg.toggles.hn = false;
    cfg.toggles.eg = false;
    cfg.toggles.fr = false;
    cfg.toggles.mps = false;
    const auto res = conquer(reg, cfg.games, init_params(256, 0), cfg);
    for (const auto& m : res.metrics) {
      CHECK(m.kept == m.trajectories);
      CHECK(m.epsilon == 0.0);
      CHECK(m.format_penalized == 0);
      CHECK(m.seeds.at("hanoi3") == m.seeds.at("tictactoe"));
    }
  }

  TEST_CASE("conquer is reproducible and stream-dependent") {
    const GameRegistry reg = register_builtin_games();
    const RunConfig cfg = small_config();
    const auto a = conquer(reg, cfg.games, init_params(256, 0), cfg);
    const auto b = conquer(reg, cfg.games, init_params(256, 0), cfg);
    CHECK(dump(a.metrics) == dump(b.metrics));
    CHECK(a.best.theta == b.best.theta);
    ConquerOptions other;
    other.stream = "elsewhere";
    const auto c = conquer(reg, cfg.games, init_params(256, 0), cfg, other);
    CHECK(dump(a.metrics) != dump(c.metrics));
  }

  TEST_CASE("conquer input validation") {
    const GameRegistry reg = register_builtin_games();
    const RunConfig cfg = small_config();
    CHECK_THROWS(conquer(reg, {}, init_params(256, 0), cfg));
    CHECK_THROWS_AS(conquer(reg, {"nope"}, init_params(256, 0), cfg), GameError);
    CHECK_THROWS_AS(conquer(reg, cfg.games, init_params(64, 0), cfg), PolicyError);
  }
}
