#include "dfc/games.hpp"

namespace dfc {
namespace {

enum KuhnAction : int { kCheck = 0, kBet = 1, kCall = 2, kFold = 3 };
constexpr std::array<std::string_view, 4> kNames = {"Check", "Bet", "Call", "Fold"};
constexpr std::array<char, 4> kCodes = {'c', 'b', 'k', 'f'};

// Three-card poker (J < Q < K), one card each, ante 1, a single bet round.
// Player 0 checks or bets; facing a bet a player calls or folds; check-check
// and bet-call go to showdown.
class KuhnPoker final : public Game {
 public:
  explicit KuhnPoker(int max_steps)
      : Game(GameSpec{"kuhn_poker", 2, InitMode::RandomInit, max_steps, {{"cards", 3}}}) {}

  Board initial_board(std::uint64_t seed) const override {
    Rng rng(mix_seed(seed, hash_string("kuhn_poker")));
    KuhnBoard b;
    const int first = static_cast<int>(uniform_index(rng, 3));
    const int offset = 1 + static_cast<int>(uniform_index(rng, 2));
    b.cards = {first, (first + offset) % 3};
    return b;
  }

  std::vector<Move> legal_moves(const GameState& state) const override {
    const auto& b = std::get<KuhnBoard>(state.board);
    if (facing_bet(b)) return {Move{kCall, 0, 0}, Move{kFold, 0, 0}};
    return {Move{kCheck, 0, 0}, Move{kBet, 0, 0}};
  }

  std::string format_move(const Move& m) const override {
    return "[" + std::string(kNames[static_cast<std::size_t>(m.kind)]) + "]";
  }

  std::optional<Move> parse_move(std::string_view raw) const override {
    auto body = grammar::bracket_body(raw);
    if (!body) return std::nullopt;
    for (int k = 0; k < 4; ++k) {
      if (grammar::iequals(*body, kNames[static_cast<std::size_t>(k)])) return Move{k, 0, 0};
    }
    return std::nullopt;
  }

  void apply(GameState& state, const Move& m) const override {
    auto& b = std::get<KuhnBoard>(state.board);
    const int me = state.current_player;
    b.history.push_back(kCodes[static_cast<std::size_t>(m.kind)]);
    if (m.kind == kFold) {
      finish(state, 1 - me);
    } else if (m.kind == kCall || b.history == "cc") {
      finish(state, b.cards[0] > b.cards[1] ? 0 : 1);
    } else {
      state.current_player = 1 - me;
    }
  }

  void describe(const GameState& state, const Move& m, TokenSink& sink) const override {
    const auto& b = std::get<KuhnBoard>(state.board);
    const int card = b.cards[static_cast<std::size_t>(state.current_player)];
    const std::uint64_t hist = hash_string(b.history);
    sink.add(tag("card_action"), card, hist, m.kind);
    sink.add(tag("card_strength"), card, m.kind == kBet || m.kind == kCall);
  }

 private:
  static bool facing_bet(const KuhnBoard& b) {
    return !b.history.empty() && b.history.back() == 'b';
  }

  static void finish(GameState& state, int winner) {
    state.terminal = true;
    state.outcome[static_cast<std::size_t>(winner)] = StepOutcome::Win;
    state.outcome[static_cast<std::size_t>(1 - winner)] = StepOutcome::Lose;
  }
};

}  // namespace

std::shared_ptr<const Game> make_kuhn_poker(int max_steps) {
  return std::make_shared<KuhnPoker>(max_steps);
}

}  // namespace dfc
