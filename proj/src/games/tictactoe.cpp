#include <algorithm>

#include "dfc/games.hpp"

namespace dfc {
namespace {

constexpr std::array<std::array<int, 3>, 8> kLines = {{
    {0, 1, 2}, {3, 4, 5}, {6, 7, 8},  // rows
    {0, 3, 6}, {1, 4, 7}, {2, 5, 8},  // columns
    {0, 4, 8}, {2, 4, 6},             // diagonals
}};

using Cells = std::vector<std::int8_t>;

// Lines through `cell` holding one `mark` and two empty cells.
int open_singles(const Cells& cells, int cell, std::int8_t mark) {
  int n = 0;
  for (const auto& line : kLines) {
    if (std::find(line.begin(), line.end(), cell) == line.end()) continue;
    int n_mark = 0, n_empty = 0;
    for (int c : line) {
      if (c == cell) continue;
      n_mark += cells[static_cast<std::size_t>(c)] == mark;
      n_empty += cells[static_cast<std::size_t>(c)] == 0;
    }
    n += n_mark == 1 && n_empty == 1;
  }
  return n;
}

// Empty cells where `mark` would create two simultaneous winning threats.
int fork_cells(const Cells& cells, std::int8_t mark) {
  int n = 0;
  for (int c = 0; c < 9; ++c) {
    if (cells[static_cast<std::size_t>(c)] == 0 && open_singles(cells, c, mark) >= 2) ++n;
  }
  return n;
}

class TicTacToe final : public Game {
 public:
  explicit TicTacToe(int max_steps)
      : Game(GameSpec{"tictactoe", 2, InitMode::FixedInit, max_steps, {{"size", 3}}}) {}

  Board initial_board(std::uint64_t) const override {
    GridBoard b;
    b.rows = 3;
    b.cols = 3;
    b.cells.assign(9, 0);
    return b;
  }

  std::vector<Move> legal_moves(const GameState& state) const override {
    const auto& b = std::get<GridBoard>(state.board);
    std::vector<Move> moves;
    for (int i = 0; i < 9; ++i) {
      if (b.cells[static_cast<std::size_t>(i)] == 0) moves.push_back(Move{0, i, 0});
    }
    return moves;
  }

  std::string format_move(const Move& m) const override { return "[" + std::to_string(m.x) + "]"; }

  std::optional<Move> parse_move(std::string_view raw) const override {
    auto body = grammar::bracket_body(raw);
    if (!body) return std::nullopt;
    auto n = grammar::parse_int(*body);
    if (!n || *n < 0 || *n > 8) return std::nullopt;
    return Move{0, *n, 0};
  }

  void apply(GameState& state, const Move& m) const override {
    auto& b = std::get<GridBoard>(state.board);
    const int me = state.current_player;
    const auto mark = static_cast<std::int8_t>(me + 1);
    b.cells[static_cast<std::size_t>(m.x)] = mark;
    for (const auto& line : kLines) {
      if (std::all_of(line.begin(), line.end(),
                      [&](int c) { return b.cells[static_cast<std::size_t>(c)] == mark; })) {
        state.terminal = true;
        state.outcome[static_cast<std::size_t>(me)] = StepOutcome::Win;
        state.outcome[static_cast<std::size_t>(1 - me)] = StepOutcome::Lose;
        return;
      }
    }
    if (std::none_of(b.cells.begin(), b.cells.end(), [](std::int8_t c) { return c == 0; })) {
      state.terminal = true;
      state.outcome = {StepOutcome::Draw, StepOutcome::Draw};
      return;
    }
    state.current_player = 1 - me;
  }

  void describe(const GameState& state, const Move& m, TokenSink& sink) const override {
    const auto& b = std::get<GridBoard>(state.board);
    const auto own = static_cast<std::int8_t>(state.current_player + 1);
    const auto opp = static_cast<std::int8_t>(2 - state.current_player);
    const int cell = m.x;

    int wins = 0, blocks = 0, threats = 0, opp_singles = 0;
    for (const auto& line : kLines) {
      if (std::find(line.begin(), line.end(), cell) == line.end()) continue;
      int n_own = 0, n_opp = 0;
      for (int c : line) {
        if (c == cell) continue;
        n_own += b.cells[static_cast<std::size_t>(c)] == own;
        n_opp += b.cells[static_cast<std::size_t>(c)] == opp;
      }
      sink.add(tag("line"), n_own, n_opp);
      wins += n_own == 2;
      blocks += n_opp == 2;
      threats += n_own == 1 && n_opp == 0;
      opp_singles += n_opp == 1 && n_own == 0;
    }
    sink.add(tag("cell"), cell);
    if (wins > 0) sink.add(tag("win_now"));
    if (blocks > 0) sink.add(tag("block"));
    sink.add(tag("threats"), std::min(threats, 2));
    sink.add(tag("opp_singles"), std::min(opp_singles, 2));

    // Does the opponent keep an immediate win elsewhere after this move?
    bool leaves_win = false;
    for (const auto& line : kLines) {
      if (std::find(line.begin(), line.end(), cell) != line.end()) continue;
      int n_opp = 0, n_empty = 0;
      for (int c : line) {
        n_opp += b.cells[static_cast<std::size_t>(c)] == opp;
        n_empty += b.cells[static_cast<std::size_t>(c)] == 0;
      }
      leaves_win = leaves_win || (n_opp == 2 && n_empty == 1);
    }
    if (leaves_win && wins == 0) sink.add(tag("ignores_threat"));

    Cells after = b.cells;
    after[static_cast<std::size_t>(cell)] = own;
    sink.add(tag("own_forks_next"), std::min(fork_cells(after, own), 2));
    sink.add(tag("opp_forks_next"), std::min(fork_cells(after, opp), 2));
    const auto placed = std::count_if(b.cells.begin(), b.cells.end(), [](std::int8_t c) { return c != 0; });
    sink.add(tag("opening"), cell, std::min<long>(placed, 3));
  }
};

}  // namespace

std::shared_ptr<const Game> make_tictactoe(int max_steps) {
  return std::make_shared<TicTacToe>(max_steps);
}

}  // namespace dfc
