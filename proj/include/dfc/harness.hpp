#pragma once

// Evaluation against scripted opponents and W/D/L accounting.

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dfc/games.hpp"
#include "dfc/policy.hpp"
#include "dfc/trainer.hpp"

namespace dfc {

class HarnessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class OpponentKind { Random, Greedy, Minimax, Initial };

struct OpponentSpec {
  OpponentKind kind = OpponentKind::Random;
  int depth = 9;        // Minimax search depth in plies
  std::string source;   // Initial: checkpoint path, for labelling only
  std::shared_ptr<const PolicyParams> policy;  // Initial: the opponent policy

  std::string label() const;
};

// Parses "random", "greedy", "minimax" / "minimax:<depth>". Initial opponents
// need a policy and are built with initial_opponent().
OpponentSpec parse_opponent(std::string_view text);
OpponentSpec initial_opponent(std::shared_ptr<const PolicyParams> policy, std::string source);

// Uniform over legal actions.
Actor random_actor();
// One-ply heuristic: take an immediate win, otherwise block the opponent's
// immediate win, otherwise a random legal move. Liar's dice and Kuhn poker use
// simple hand-strength rules instead.
Actor greedy_actor();
// Depth-limited negamax with alpha-beta pruning over perfect-information
// two-player games; equally valued moves are broken at random. Positions at
// the depth limit score 0.
Actor minimax_actor(int depth);
bool minimax_supported(const Game& game);

// Game value of `state` for the player to move under perfect play
// (+1 win, 0 draw, -1 loss), searching at most `depth` plies.
int minimax_value(const GameState& state, int depth);

// Throws HarnessError if the opponent cannot play this game.
Actor make_opponent(const OpponentSpec& spec, const Game& game, const Featurizer& featurizer,
                    bool distractors);

struct Wdl {
  int wins = 0;
  int draws = 0;
  int losses = 0;

  int total() const { return wins + draws + losses; }
  double win_rate() const { return total() == 0 ? 0.0 : static_cast<double>(wins) / total(); }
  void add(StepOutcome outcome);
  Wdl& operator+=(const Wdl& other);
};

struct MatchRow {
  std::string game_id;
  std::string opponent;
  int players = 1;
  std::array<Wdl, 2> by_role;  // by_role[1] is empty for single-player games
  Wdl combined;
};

struct EvalOptions {
  int n_seeds = 20;
  std::uint64_t seed_base = 0;
  bool distractors = true;
  std::vector<Trajectory>* record = nullptr;  // receives every episode when set
};

// The policy plays greedily. Two-player games are played n_seeds times from
// each seat; single-player games n_seeds times, ignoring the opponent.
MatchRow evaluate(const PolicyParams& policy, const Featurizer& featurizer,
                  const GameRegistry& registry, const std::string& game_id,
                  const OpponentSpec& opponent, const EvalOptions& options);

struct MatchReport {
  std::vector<MatchRow> rows;

  // Mean over rows of the combined win rate.
  double mean_win_rate() const;
};

MatchReport evaluate_all(const PolicyParams& policy, const Featurizer& featurizer,
                         const GameRegistry& registry, const std::vector<std::string>& games,
                         const OpponentSpec& opponent, const EvalOptions& options);

// Plain-text W/D/L table, one line per row with per-role breakdown.
std::string format_report(const MatchReport& report);

}  // namespace dfc
