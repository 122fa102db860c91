#include <algorithm>
#include <cstdlib>

#include "dfc/games.hpp"

namespace dfc {
namespace {

// Single-player: find a secret in 1..max_value; each wrong guess narrows the
// feasible interval via higher/lower feedback.
class GuessNumber final : public Game {
 public:
  GuessNumber(int max_steps, int max_value)
      : Game(GameSpec{"guess_number", 1, InitMode::RandomInit, max_steps,
                      {{"max_value", max_value}}}),
        max_value_(max_value) {}

  Board initial_board(std::uint64_t seed) const override {
    Rng rng(mix_seed(seed, hash_string("guess_number")));
    GuessNumberBoard b;
    b.secret = 1 + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(max_value_)));
    b.lo = 1;
    b.hi = max_value_;
    return b;
  }

  std::vector<Move> legal_moves(const GameState&) const override {
    std::vector<Move> moves;
    moves.reserve(static_cast<std::size_t>(max_value_));
    for (int g = 1; g <= max_value_; ++g) moves.push_back(Move{0, g, 0});
    return moves;
  }

  std::string format_move(const Move& m) const override {
    return "[" + std::to_string(m.x) + "]";
  }

  std::optional<Move> parse_move(std::string_view raw) const override {
    auto body = grammar::bracket_body(raw);
    if (!body) return std::nullopt;
    auto n = grammar::parse_int(*body);
    if (!n || *n < 1 || *n > max_value_) return std::nullopt;
    return Move{0, *n, 0};
  }

  void apply(GameState& state, const Move& m) const override {
    auto& b = std::get<GuessNumberBoard>(state.board);
    b.last_guess = m.x;
    if (m.x == b.secret) {
      b.last_feedback = 0;
      b.lo = b.hi = m.x;
      state.terminal = true;
      state.outcome = {StepOutcome::Win, StepOutcome::Ongoing};
      return;
    }
    if (m.x < b.secret) {
      b.last_feedback = +1;
      if (m.x + 1 > b.lo) b.lo = m.x + 1;
    } else {
      b.last_feedback = -1;
      if (m.x - 1 < b.hi) b.hi = m.x - 1;
    }
  }

  void describe(const GameState& state, const Move& m, TokenSink& sink) const override {
    const auto& b = std::get<GuessNumberBoard>(state.board);
    const int g = m.x;
    if (g < b.lo || g > b.hi) {
      sink.add(tag("outside"));
      sink.add(tag("outside_dist"), std::min(8, std::min(std::abs(g - b.lo), std::abs(g - b.hi))));
      return;
    }
    const int width = b.hi - b.lo + 1;
    if (width == 1) {
      sink.add(tag("only_candidate"));
      return;
    }
    // Position of the guess inside the feasible interval, in eighths.
    const int pos = (8 * (g - b.lo) + (width - 1) / 2) / (width - 1);
    sink.add(tag("pos"), pos);
    // Distance from the midpoint relative to the width.
    const int centre = std::abs(2 * g - b.lo - b.hi);
    const int rel = (8 * centre) / width;
    sink.add(tag("centre_dist"), rel);
    sink.add(tag("centre_dist_w"), rel, width <= 4 ? 0 : (width <= 16 ? 1 : 2));
  }

 private:
  int max_value_;
};

}  // namespace

std::shared_ptr<const Game> make_guess_number(int max_steps, int max_value) {
  if (max_value < 2) throw GameError("guess_number needs max_value >= 2");
  return std::make_shared<GuessNumber>(max_steps, max_value);
}

}  // namespace dfc
