#pragma once

// Turn-based game environments with a bracketed action grammar.
//
// Every environment is a pure state transformer: reset() builds an initial
// GameState from a seed, step() returns a new state. GameState values are
// plain data and may be copied across threads freely.

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "dfc/rng.hpp"

namespace dfc {

class GameError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class InitMode { FixedInit, RandomInit };
enum class StepOutcome { Ongoing, Win, Draw, Lose };

std::string_view to_string(InitMode mode);
std::string_view to_string(StepOutcome outcome);

inline constexpr int kDefaultMaxSteps = 120;

struct GameSpec {
  std::string game_id;
  int players = 1;
  InitMode init_mode = InitMode::FixedInit;
  int max_steps = kDefaultMaxSteps;
  std::map<std::string, int> variant;
};

// Game-specific move payload. Interpretation is up to each game.
struct Move {
  int kind = 0;
  int x = 0;
  int y = 0;
  friend bool operator==(const Move&, const Move&) = default;
};

// A raw action string plus its parse. An empty `parsed` is the FormatError
// marker: the string is outside the grammar or names an illegal move.
struct ActionToken {
  std::string raw;
  std::optional<Move> parsed;

  bool format_error() const { return !parsed.has_value(); }
};

struct GuessNumberBoard {
  int secret = 0;
  int lo = 1;  // feasible interval implied by the feedback so far
  int hi = 1;
  int last_guess = 0;
  int last_feedback = 0;  // -1 lower, +1 higher, 0 none
  friend bool operator==(const GuessNumberBoard&, const GuessNumberBoard&) = default;
};

struct HanoiBoard {
  std::array<std::vector<int>, 3> pegs;  // bottom to top, disk sizes 1..n
  int last_from = -1;
  int last_to = -1;
  friend bool operator==(const HanoiBoard&, const HanoiBoard&) = default;
};

// Shared by tictactoe and connect4. Cells: 0 empty, 1 player 0, 2 player 1.
// Row 0 is the bottom row for gravity games.
struct GridBoard {
  int rows = 0;
  int cols = 0;
  std::vector<std::int8_t> cells;
  friend bool operator==(const GridBoard&, const GridBoard&) = default;

  std::int8_t at(int r, int c) const { return cells[static_cast<std::size_t>(r * cols + c)]; }
  std::int8_t& at(int r, int c) { return cells[static_cast<std::size_t>(r * cols + c)]; }
};

struct LiarsDiceBoard {
  std::array<std::vector<int>, 2> dice;
  int bid_quantity = 0;  // 0 means no bid yet
  int bid_face = 0;
  int bidder = -1;
  friend bool operator==(const LiarsDiceBoard&, const LiarsDiceBoard&) = default;
};

struct KuhnBoard {
  std::array<int, 2> cards{};  // 0 = J, 1 = Q, 2 = K
  std::string history;         // 'c' check, 'b' bet, 'k' call, 'f' fold
  friend bool operator==(const KuhnBoard&, const KuhnBoard&) = default;
};

using Board =
    std::variant<GuessNumberBoard, HanoiBoard, GridBoard, LiarsDiceBoard, KuhnBoard>;

class Game;

struct GameState {
  std::shared_ptr<const Game> game;
  int current_player = 0;
  int step_count = 0;
  bool terminal = false;
  std::array<StepOutcome, 2> outcome{StepOutcome::Ongoing, StepOutcome::Ongoing};
  Board board;

  const GameSpec& spec() const;
  const std::string& game_id() const { return spec().game_id; }
  int players() const { return spec().players; }

  // Compares game identity by id and all state content.
  friend bool operator==(const GameState& a, const GameState& b);
};

// Collects hashed feature tokens for one (state, action) pair. Game-scoped
// tokens are salted with the game id; global tokens are shared by all games.
class TokenSink {
 public:
  TokenSink(std::uint64_t game_salt, std::uint64_t global_salt)
      : game_salt_(game_salt), global_salt_(global_salt) {}

  template <typename... Parts>
  void add(Parts... parts) {
    tokens_.push_back(fold(game_salt_, parts...));
  }

  template <typename... Parts>
  void add_global(Parts... parts) {
    tokens_.push_back(fold(global_salt_, parts...));
  }

  const std::vector<std::uint64_t>& tokens() const { return tokens_; }
  void clear() { tokens_.clear(); }

 private:
  template <typename... Parts>
  static std::uint64_t fold(std::uint64_t h, Parts... parts) {
    ((h = splitmix64(h ^ static_cast<std::uint64_t>(parts))), ...);
    return h;
  }

  std::uint64_t game_salt_;
  std::uint64_t global_salt_;
  std::vector<std::uint64_t> tokens_;
};

// Token kind tags; compile-time hashed names keep feature code readable.
constexpr std::uint64_t tag(std::string_view name) { return hash_string(name); }

// Rules engine for one registered game. Implementations are stateless apart
// from their GameSpec.
class Game {
 public:
  explicit Game(GameSpec spec) : spec_(std::move(spec)) {}
  virtual ~Game() = default;
  Game(const Game&) = delete;
  Game& operator=(const Game&) = delete;

  const GameSpec& spec() const { return spec_; }

  virtual Board initial_board(std::uint64_t seed) const = 0;
  // Legal moves in canonical order.
  virtual std::vector<Move> legal_moves(const GameState& state) const = 0;
  virtual std::string format_move(const Move& move) const = 0;
  // Grammar check only; legality is checked by parse_action().
  virtual std::optional<Move> parse_move(std::string_view raw) const = 0;
  // Applies a legal move for state.current_player; sets terminal/outcome and
  // advances current_player. Step counting is done by step().
  virtual void apply(GameState& state, const Move& move) const = 0;
  // Emits feature tokens for `move` from the acting player's point of view.
  // Must not read the opponent's hidden information.
  virtual void describe(const GameState& state, const Move& move, TokenSink& sink) const = 0;

 private:
  GameSpec spec_;
};

class GameRegistry {
 public:
  void add(std::shared_ptr<const Game> game);
  std::shared_ptr<const Game> find(std::string_view game_id) const;  // throws GameError
  bool contains(std::string_view game_id) const;
  std::vector<std::string> ids() const;  // registration order
  std::size_t size() const { return games_.size(); }

 private:
  std::vector<std::shared_ptr<const Game>> games_;
};

// Builds guess_number, hanoi3, hanoi4, tictactoe, connect4, liars_dice and
// kuhn_poker with the given per-trajectory step cap.
GameRegistry register_builtin_games(int max_steps = kDefaultMaxSteps);

std::shared_ptr<const Game> make_guess_number(int max_steps, int max_value = 64);
std::shared_ptr<const Game> make_hanoi(int max_steps, int disks);
std::shared_ptr<const Game> make_tictactoe(int max_steps);
std::shared_ptr<const Game> make_connect_four(int max_steps);
std::shared_ptr<const Game> make_liars_dice(int max_steps);
std::shared_ptr<const Game> make_kuhn_poker(int max_steps);

GameState reset(std::shared_ptr<const Game> game, std::uint64_t seed);
GameState reset(const GameRegistry& registry, std::string_view game_id, std::uint64_t seed);

std::vector<std::string> legal_actions(const GameState& state);
ActionToken parse_action(const GameState& state, std::string_view raw);

struct StepResult {
  GameState state;
  StepOutcome outcome;  // for the player who moved
};

StepResult step(const GameState& state, const ActionToken& token);

// Ends the episode because `state.current_player` emitted a FormatError
// action: that player loses and the opponent (if any) wins.
StepResult forfeit(const GameState& state);

// Malformed strings offered alongside legal actions during sampling.
inline constexpr std::array<std::string_view, 2> kDistractorActions = {
    "[??]", "Let me think about my next move."};

// Shared helpers for bracketed grammars.
namespace grammar {
// Returns the text between a leading '[' and trailing ']' (outer whitespace
// ignored), or nullopt.
std::optional<std::string_view> bracket_body(std::string_view raw);
std::optional<int> parse_int(std::string_view text);
std::vector<std::string_view> split_words(std::string_view text);
bool iequals(std::string_view a, std::string_view b);
}  // namespace grammar

}  // namespace dfc
