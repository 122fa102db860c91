#include <algorithm>

#include "dfc/games.hpp"

namespace dfc {
namespace {

constexpr int kDicePerPlayer = 2;
constexpr int kFaces = 6;
constexpr int kMaxQuantity = 2 * kDicePerPlayer;
constexpr int kCallKind = 1;

int count_face(const std::vector<int>& dice, int face) {
  return static_cast<int>(std::count(dice.begin(), dice.end(), face));
}

// Two players, two hidden dice each. Bids ("[q f]": at least q dice show f)
// must strictly increase by quantity, then face. "[Call]" challenges the
// standing bid: the bidder wins iff the bid holds over all four dice.
class LiarsDice final : public Game {
 public:
  explicit LiarsDice(int max_steps)
      : Game(GameSpec{"liars_dice", 2, InitMode::RandomInit, max_steps,
                      {{"dice_per_player", kDicePerPlayer}, {"faces", kFaces}}}) {}

  Board initial_board(std::uint64_t seed) const override {
    Rng rng(mix_seed(seed, hash_string("liars_dice")));
    LiarsDiceBoard b;
    for (auto& hand : b.dice) {
      for (int i = 0; i < kDicePerPlayer; ++i) {
        hand.push_back(1 + static_cast<int>(uniform_index(rng, kFaces)));
      }
      std::sort(hand.begin(), hand.end());
    }
    return b;
  }

  std::vector<Move> legal_moves(const GameState& state) const override {
    const auto& b = std::get<LiarsDiceBoard>(state.board);
    std::vector<Move> moves;
    for (int q = 1; q <= kMaxQuantity; ++q) {
      for (int f = 1; f <= kFaces; ++f) {
        if (q > b.bid_quantity || (q == b.bid_quantity && f > b.bid_face)) {
          moves.push_back(Move{0, q, f});
        }
      }
    }
    if (b.bid_quantity > 0) moves.push_back(Move{kCallKind, 0, 0});
    return moves;
  }

  std::string format_move(const Move& m) const override {
    if (m.kind == kCallKind) return "[Call]";
    return "[" + std::to_string(m.x) + " " + std::to_string(m.y) + "]";
  }

  std::optional<Move> parse_move(std::string_view raw) const override {
    auto body = grammar::bracket_body(raw);
    if (!body) return std::nullopt;
    auto words = grammar::split_words(*body);
    if (words.size() == 1 && grammar::iequals(words[0], "call")) return Move{kCallKind, 0, 0};
    if (words.size() != 2) return std::nullopt;
    auto q = grammar::parse_int(words[0]);
    auto f = grammar::parse_int(words[1]);
    if (!q || !f || *q < 1 || *q > kMaxQuantity || *f < 1 || *f > kFaces) return std::nullopt;
    return Move{0, *q, *f};
  }

  void apply(GameState& state, const Move& m) const override {
    auto& b = std::get<LiarsDiceBoard>(state.board);
    const int me = state.current_player;
    if (m.kind == kCallKind) {
      const int total = count_face(b.dice[0], b.bid_face) + count_face(b.dice[1], b.bid_face);
      const int winner = total >= b.bid_quantity ? b.bidder : me;
      state.terminal = true;
      state.outcome[static_cast<std::size_t>(winner)] = StepOutcome::Win;
      state.outcome[static_cast<std::size_t>(1 - winner)] = StepOutcome::Lose;
      return;
    }
    b.bid_quantity = m.x;
    b.bid_face = m.y;
    b.bidder = me;
    state.current_player = 1 - me;
  }

  void describe(const GameState& state, const Move& m, TokenSink& sink) const override {
    const auto& b = std::get<LiarsDiceBoard>(state.board);
    const auto& hand = b.dice[static_cast<std::size_t>(state.current_player)];
    if (m.kind == kCallKind) {
      const int need = b.bid_quantity - count_face(hand, b.bid_face);
      sink.add(tag("call_need"), std::clamp(need, -1, 3));
      return;
    }
    const int have = count_face(hand, m.y);
    const int need = m.x - have;
    sink.add(tag("bid_need"), std::clamp(need, -1, 3));
    sink.add(tag("bid_have"), have, b.bid_quantity == 0);
    sink.add(tag("bid_quantity"), m.x);
    // Size of the raise over the standing bid.
    const int jump = (m.x - b.bid_quantity) * kFaces + (m.y - b.bid_face);
    sink.add(tag("bid_jump"), std::min(jump, 7));
  }
};

}  // namespace

std::shared_ptr<const Game> make_liars_dice(int max_steps) {
  return std::make_shared<LiarsDice>(max_steps);
}

}  // namespace dfc
