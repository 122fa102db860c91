#include <array>

#include "doctest.h"
#include "dfc/harness.hpp"
#include "helpers.hpp"

using namespace dfc;
using dfc::testing::play;

namespace {

using Cells = std::array<int, 9>;

int line_winner(const Cells& c) {
  static constexpr int lines[8][3] = {{0, 1, 2}, {3, 4, 5}, {6, 7, 8}, {0, 3, 6},
                                      {1, 4, 7}, {2, 5, 8}, {0, 4, 8}, {2, 4, 6}};
  for (const auto& l : lines) {
    if (c[l[0]] != 0 && c[l[0]] == c[l[1]] && c[l[1]] == c[l[2]]) return c[l[0]];
  }
  return 0;
}

// Exhaustive game value for the side to move (+1 win, 0 draw, -1 loss).
int solve(Cells& c, int mover) {
  int best = -2;
  bool any = false;
  for (int i = 0; i < 9; ++i) {
    if (c[i] != 0) continue;
    any = true;
    c[i] = mover;
    const int v = line_winner(c) == mover ? 1 : -solve(c, 3 - mover);
    c[i] = 0;
    best = std::max(best, v);
    if (best == 1) break;
  }
  return any ? best : 0;
}

Cells cells_of(const GameState& s) {
  Cells out{};
  const auto& g = std::get<GridBoard>(s.board);
  for (int i = 0; i < 9; ++i) out[i] = g.cells[static_cast<std::size_t>(i)];
  return out;
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("opponent parsing") {
    CHECK(parse_opponent("random").kind == OpponentKind::Random);
    CHECK(parse_opponent("greedy").kind == OpponentKind::Greedy);
    CHECK(parse_opponent("minimax").depth == 9);
    CHECK(parse_opponent("minimax:4").depth == 4);
    CHECK(parse_opponent("minimax:4").label() == "minimax:4");
    CHECK_THROWS_AS(parse_opponent("minimax:x"), HarnessError);
    CHECK_THROWS_AS(parse_opponent("minimax:0"), HarnessError);
    CHECK_THROWS_AS(parse_opponent("alphazero"), HarnessError);
    CHECK_THROWS_AS(initial_opponent(nullptr, "x"), HarnessError);
    auto p = std::make_shared<const PolicyParams>(init_params(8, 0));
    CHECK(initial_opponent(p, "a.ckpt").label() == "initial:a.ckpt");
  }

  TEST_CASE("minimax agrees with exhaustive search on reachable tictactoe positions") {
    const GameRegistry reg = register_builtin_games();
    Rng rng(3);
    CHECK(minimax_value(reset(reg, "tictactoe", 0), 9) == 0);
    for (int trial = 0; trial < 200; ++trial) {
      GameState s = reset(reg, "tictactoe", 0);
      const int depth = static_cast<int>(uniform_index(rng, 7));
      for (int i = 0; i < depth && !s.terminal; ++i) {
        const auto legal = legal_actions(s);
        s = step(s, parse_action(s, legal[uniform_index(rng, legal.size())])).state;
      }
      if (s.terminal) continue;
      Cells c = cells_of(s);
      // Marks are 1 and 2 with player 0 owning 1; the board side to move
      // follows the mark count.
      int x = 0, o = 0;
      for (int v : c) {
        x += v == 1;
        o += v == 2;
      }
      const int mover = x == o ? 1 : 2;
      CHECK(minimax_value(s, 9) == solve(c, mover));
    }
  }

  TEST_CASE("minimax and greedy take an immediate win and block") {
    const GameRegistry reg = register_builtin_games();
    Rng rng(4);
    // X holds 0 and 1; O holds 3 and 4; X to move wins at 2.
    const GameState win = play(reset(reg, "tictactoe", 0), {"[0]", "[3]", "[1]", "[4]"});
    const Actor mm = minimax_actor(9);
    const Actor gr = greedy_actor();
    for (int i = 0; i < 10; ++i) {
      CHECK(mm(win, rng).raw == "[2]");
      CHECK(gr(win, rng).raw == "[2]");
    }
    // X holds 0 and 1, O to move must block at 2.
    const GameState block = play(reset(reg, "tictactoe", 0), {"[0]", "[4]", "[1]"});
    for (int i = 0; i < 10; ++i) {
      CHECK(mm(block, rng).raw == "[2]");
      CHECK(gr(block, rng).raw == "[2]");
    }
  }

  TEST_CASE("minimax support") {
    const GameRegistry reg = register_builtin_games();
    CHECK(minimax_supported(*reg.find("tictactoe")));
    CHECK(minimax_supported(*reg.find("connect4")));
    CHECK_FALSE(minimax_supported(*reg.find("liars_dice")));
    CHECK_FALSE(minimax_supported(*reg.find("hanoi3")));
    const Featurizer f(256, 0);
    CHECK_THROWS_AS(make_opponent(parse_opponent("minimax"), *reg.find("liars_dice"), f, true),
                    HarnessError);
    CHECK_THROWS_AS(minimax_actor(0), HarnessError);
  }

  TEST_CASE("evaluation accounting covers every episode") {
    const GameRegistry reg = register_builtin_games();
    const Featurizer f(256, 0);
    const PolicyParams p = init_params(256, 0);
    EvalOptions opts;
    opts.n_seeds = 20;
    const MatchRow row = evaluate(p, f, reg, "tictactoe", parse_opponent("random"), opts);
    CHECK(row.combined.total() == 40);
    CHECK(row.by_role[0].total() == 20);
    CHECK(row.by_role[1].total() == 20);
    CHECK(row.players == 2);
    const MatchRow single = evaluate(p, f, reg, "hanoi3", parse_opponent("random"), opts);
    CHECK(single.combined.total() == 20);
    CHECK(single.by_role[1].total() == 0);
    opts.n_seeds = 0;
    CHECK_THROWS_AS(evaluate(p, f, reg, "hanoi3", parse_opponent("random"), opts), HarnessError);
  }

  TEST_CASE("an untrained policy never beats perfect play") {
    const GameRegistry reg = register_builtin_games();
    const Featurizer f(256, 0);
    const PolicyParams p = init_params(256, 0);
    EvalOptions opts;
    opts.n_seeds = 20;
    const MatchRow row = evaluate(p, f, reg, "tictactoe", parse_opponent("minimax:9"), opts);
    CHECK(row.combined.total() == 40);
    CHECK(row.combined.wins == 0);
  }

  TEST_CASE("evaluation is deterministic and records episodes") {
    const GameRegistry reg = register_builtin_games();
    const Featurizer f(256, 0);
    const PolicyParams p = init_params(256, 1);
    std::vector<Trajectory> rec;
    EvalOptions opts;
    opts.n_seeds = 5;
    opts.record = &rec;
    const auto a = evaluate(p, f, reg, "kuhn_poker", parse_opponent("greedy"), opts);
    CHECK(rec.size() == 10);
    opts.record = nullptr;
    const auto b = evaluate(p, f, reg, "kuhn_poker", parse_opponent("greedy"), opts);
    CHECK(a.combined.wins == b.combined.wins);
    CHECK(a.combined.losses == b.combined.losses);
  }

  TEST_CASE("report helpers") {
    Wdl w;
    w.add(StepOutcome::Win);
    w.add(StepOutcome::Draw);
    w.add(StepOutcome::Lose);
    w.add(StepOutcome::Lose);
    CHECK(w.total() == 4);
    CHECK(w.win_rate() == 0.25);
    CHECK_THROWS_AS(w.add(StepOutcome::Ongoing), HarnessError);
    MatchReport r;
    r.rows.resize(2);
    r.rows[0].combined = w;
    r.rows[0].game_id = "a";
    r.rows[1].combined.wins = 3;
    r.rows[1].combined.losses = 1;
    r.rows[1].game_id = "b";
    CHECK(r.mean_win_rate() == 0.5);
    const std::string text = format_report(r);
    CHECK(text.find("mean win rate") != std::string::npos);
  }

  TEST_CASE("scripted opponents only emit legal actions") {
    const GameRegistry reg = register_builtin_games();
    Rng rng(8);
    const std::array<Actor, 2> actors = {random_actor(), greedy_actor()};
    for (const auto& id : reg.ids()) {
      for (const auto& a : actors) {
        for (int seed = 0; seed < 5; ++seed) {
          GameState s = reset(reg, id, static_cast<std::uint64_t>(seed));
          while (!s.terminal) {
            const ActionToken t = parse_action(s, a(s, rng).raw);
            REQUIRE_FALSE(t.format_error());
            s = step(s, t).state;
          }
        }
      }
    }
  }
}
