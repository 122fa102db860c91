#include "dfc/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <sstream>

namespace dfc {

namespace {

constexpr int kWinScore = 1000;

ActionToken token_for(const GameState& state, const Move& move) {
  return ActionToken{state.game->format_move(move), move};
}

std::string pick(const std::vector<std::string>& options, Rng& rng) {
  return options[uniform_index(rng, options.size())];
}

// Moves that win immediately for the player to move in `state`.
std::vector<std::string> winning_moves(const GameState& state) {
  std::vector<std::string> out;
  for (const Move& m : state.game->legal_moves(state)) {
    const StepResult r = step(state, token_for(state, m));
    if (r.outcome == StepOutcome::Win) out.push_back(state.game->format_move(m));
  }
  return out;
}

std::string greedy_liars_dice(const GameState& state, Rng& rng) {
  const auto& b = std::get<LiarsDiceBoard>(state.board);
  const auto& own = b.dice[static_cast<std::size_t>(state.current_player)];
  auto own_count = [&](int face) { return static_cast<int>(std::count(own.begin(), own.end(), face)); };
  // Assume one of the opponent's dice matches any given face.
  auto plausible = [&](int q, int face) { return q <= own_count(face) + 1; };
  if (b.bid_quantity > 0 && !plausible(b.bid_quantity, b.bid_face)) return "[Call]";

  std::vector<Move> candidates;
  for (const Move& m : state.game->legal_moves(state)) {
    if (m.kind == 0 && plausible(m.x, m.y)) candidates.push_back(m);
  }
  if (candidates.empty()) {
    return b.bid_quantity > 0 ? "[Call]" : pick(legal_actions(state), rng);
  }
  // Lowest quantity first, then the face we hold most of.
  const auto best = std::min_element(candidates.begin(), candidates.end(), [&](const Move& x, const Move& y) {
    if (x.x != y.x) return x.x < y.x;
    return own_count(x.y) > own_count(y.y);
  });
  return state.game->format_move(*best);
}

std::string greedy_kuhn(const GameState& state, Rng& rng) {
  const auto& b = std::get<KuhnBoard>(state.board);
  const int card = b.cards[static_cast<std::size_t>(state.current_player)];
  const bool facing_bet = !b.history.empty() && b.history.back() == 'b';
  if (facing_bet) {
    if (card == 2) return "[Call]";
    if (card == 0) return "[Fold]";
    return uniform01(rng) < 1.0 / 3.0 ? "[Call]" : "[Fold]";
  }
  return card == 2 ? "[Bet]" : "[Check]";
}

int negamax(const GameState& state, int depth, int ply, int alpha, int beta) {
  if (depth == 0) return 0;
  int best = -std::numeric_limits<int>::max();
  for (const Move& m : state.game->legal_moves(state)) {
    const StepResult r = step(state, token_for(state, m));
    int score = 0;
    if (r.state.terminal) {
      if (r.outcome == StepOutcome::Win) score = kWinScore - ply;
      else if (r.outcome == StepOutcome::Lose) score = -(kWinScore - ply);
    } else {
      score = -negamax(r.state, depth - 1, ply + 1, -beta, -alpha);
    }
    best = std::max(best, score);
    alpha = std::max(alpha, score);
    if (alpha >= beta) break;
  }
  return best;
}

}  // namespace

std::string OpponentSpec::label() const {
  switch (kind) {
    case OpponentKind::Random: return "random";
    case OpponentKind::Greedy: return "greedy";
    case OpponentKind::Minimax: return "minimax:" + std::to_string(depth);
    case OpponentKind::Initial: return "initial:" + source;
  }
  return "unknown";
}

OpponentSpec parse_opponent(std::string_view text) {
  OpponentSpec spec;
  if (grammar::iequals(text, "random")) return spec;
  if (grammar::iequals(text, "greedy")) {
    spec.kind = OpponentKind::Greedy;
    return spec;
  }
  if (text.size() >= 7 && grammar::iequals(text.substr(0, 7), "minimax")) {
    spec.kind = OpponentKind::Minimax;
    if (text.size() == 7) return spec;
    const auto depth = text[7] == ':' ? grammar::parse_int(text.substr(8)) : std::nullopt;
    if (!depth || *depth < 1) {
      throw HarnessError("bad minimax depth in opponent '" + std::string(text) + "'");
    }
    spec.depth = *depth;
    return spec;
  }
  throw HarnessError("unknown opponent '" + std::string(text) +
                     "' (expected random, greedy, minimax[:depth] or initial)");
}

OpponentSpec initial_opponent(std::shared_ptr<const PolicyParams> policy, std::string source) {
  if (!policy) throw HarnessError("initial opponent needs a policy");
  OpponentSpec spec;
  spec.kind = OpponentKind::Initial;
  spec.policy = std::move(policy);
  spec.source = std::move(source);
  return spec;
}

Actor random_actor() {
  return [](const GameState& state, Rng& rng) { return ActorChoice{pick(legal_actions(state), rng), {}}; };
}

Actor greedy_actor() {
  return [](const GameState& state, Rng& rng) -> ActorChoice {
    if (std::holds_alternative<LiarsDiceBoard>(state.board)) return {greedy_liars_dice(state, rng), {}};
    if (std::holds_alternative<KuhnBoard>(state.board)) return {greedy_kuhn(state, rng), {}};
    if (auto wins = winning_moves(state); !wins.empty()) return {pick(wins, rng), {}};
    if (state.players() == 2) {
      GameState swapped = state;
      swapped.current_player = 1 - state.current_player;
      if (auto blocks = winning_moves(swapped); !blocks.empty()) return {pick(blocks, rng), {}};
    }
    return {pick(legal_actions(state), rng), {}};
  };
}

bool minimax_supported(const Game& game) {
  return game.spec().players == 2 && std::holds_alternative<GridBoard>(game.initial_board(0));
}

int minimax_value(const GameState& state, int depth) {
  if (state.terminal) throw GameError("minimax_value: state is terminal");
  const int v = negamax(state, depth, 0, -std::numeric_limits<int>::max(),
                        std::numeric_limits<int>::max());
  return (v > 0) - (v < 0);
}

Actor minimax_actor(int depth) {
  if (depth < 1) throw HarnessError("minimax depth must be >= 1");
  return [depth](const GameState& state, Rng& rng) -> ActorChoice {
    if (!minimax_supported(*state.game)) {
      throw HarnessError("minimax opponent does not support game " + state.game_id());
    }
    int best = -std::numeric_limits<int>::max();
    std::vector<std::string> best_moves;
    for (const Move& m : state.game->legal_moves(state)) {
      const StepResult r = step(state, token_for(state, m));
      int score = 0;
      if (r.state.terminal) {
        if (r.outcome == StepOutcome::Win) score = kWinScore;
        else if (r.outcome == StepOutcome::Lose) score = -kWinScore;
      } else {
        score = -negamax(r.state, depth - 1, 1, -std::numeric_limits<int>::max(),
                         std::numeric_limits<int>::max());
      }
      if (score > best) {
        best = score;
        best_moves.clear();
      }
      if (score == best) best_moves.push_back(state.game->format_move(m));
    }
    return {pick(best_moves, rng), {}};
  };
}

Actor make_opponent(const OpponentSpec& spec, const Game& game, const Featurizer& featurizer,
                    bool distractors) {
  switch (spec.kind) {
    case OpponentKind::Random: return random_actor();
    case OpponentKind::Greedy: return greedy_actor();
    case OpponentKind::Minimax:
      if (game.spec().players == 2 && !minimax_supported(game)) {
        throw HarnessError("minimax opponent does not support game " + game.spec().game_id);
      }
      return minimax_actor(spec.depth);
    case OpponentKind::Initial:
      if (!spec.policy) throw HarnessError("initial opponent has no policy");
      return policy_actor(*spec.policy, featurizer, {PolicyMode::Sample, 0.0, distractors, false});
  }
  throw HarnessError("unknown opponent kind");
}

void Wdl::add(StepOutcome outcome) {
  switch (outcome) {
    case StepOutcome::Win: ++wins; break;
    case StepOutcome::Draw: ++draws; break;
    case StepOutcome::Lose: ++losses; break;
    case StepOutcome::Ongoing: throw HarnessError("episode ended without an outcome");
  }
}

Wdl& Wdl::operator+=(const Wdl& o) {
  wins += o.wins;
  draws += o.draws;
  losses += o.losses;
  return *this;
}

MatchRow evaluate(const PolicyParams& policy, const Featurizer& featurizer,
                  const GameRegistry& registry, const std::string& game_id,
                  const OpponentSpec& opponent, const EvalOptions& options) {
  if (options.n_seeds < 1) throw HarnessError("evaluate: n_seeds must be >= 1");
  const auto game = registry.find(game_id);
  const bool two_player = game->spec().players == 2;
  const Actor learner =
      policy_actor(policy, featurizer, {PolicyMode::Greedy, 0.0, options.distractors, false});
  const Actor opp = two_player ? make_opponent(opponent, *game, featurizer, options.distractors)
                               : random_actor();

  MatchRow row;
  row.game_id = game_id;
  row.opponent = opponent.label();
  row.players = game->spec().players;
  for (int k = 0; k < options.n_seeds; ++k) {
    const std::uint64_t seed = mix_seed(options.seed_base, hash_string(game_id), k);
    for (int role = 0; role < (two_player ? 2 : 1); ++role) {
      Rng rng(mix_seed(seed, role, hash_string("evaluate")));
      const std::array<const Actor*, 2> actors =
          role == 0 ? std::array<const Actor*, 2>{&learner, &opp}
                    : std::array<const Actor*, 2>{&opp, &learner};
      Trajectory t = play_episode(game, seed, role, actors, rng);
      row.by_role[static_cast<std::size_t>(role)].add(t.learner_outcome);
      if (options.record) options.record->push_back(t);
    }
  }
  row.combined = row.by_role[0];
  row.combined += row.by_role[1];
  return row;
}

double MatchReport::mean_win_rate() const {
  if (rows.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : rows) s += r.combined.win_rate();
  return s / static_cast<double>(rows.size());
}

MatchReport evaluate_all(const PolicyParams& policy, const Featurizer& featurizer,
                         const GameRegistry& registry, const std::vector<std::string>& games,
                         const OpponentSpec& opponent, const EvalOptions& options) {
  MatchReport report;
  for (const auto& g : games) {
    report.rows.push_back(evaluate(policy, featurizer, registry, g, opponent, options));
  }
  return report;
}

std::string format_report(const MatchReport& report) {
  std::ostringstream o;
  char line[256];
  std::snprintf(line, sizeof line, "%-14s %-16s %11s %11s %11s %6s\n", "game", "opponent",
                "W/D/L", "first", "second", "win%");
  o << line;
  auto wdl = [](const Wdl& w) {
    return std::to_string(w.wins) + "/" + std::to_string(w.draws) + "/" + std::to_string(w.losses);
  };
  for (const auto& r : report.rows) {
    const std::string second = r.players == 2 ? wdl(r.by_role[1]) : "-";
    std::snprintf(line, sizeof line, "%-14s %-16s %11s %11s %11s %6.1f\n", r.game_id.c_str(),
                  r.opponent.c_str(), wdl(r.combined).c_str(), wdl(r.by_role[0]).c_str(),
                  second.c_str(), 100.0 * r.combined.win_rate());
    o << line;
  }
  std::snprintf(line, sizeof line, "mean win rate: %.4f\n", report.mean_win_rate());
  o << line;
  return o.str();
}

}  // namespace dfc
