#include <algorithm>

#include "dfc/games.hpp"

namespace dfc {
namespace {

constexpr int kRows = 6;
constexpr int kCols = 7;
constexpr std::array<std::pair<int, int>, 4> kDirections = {
    std::pair{1, 0}, std::pair{0, 1}, std::pair{1, 1}, std::pair{1, -1}};

bool inside(int r, int c) { return r >= 0 && r < kRows && c >= 0 && c < kCols; }

int landing_row(const GridBoard& b, int col) {
  for (int r = 0; r < kRows; ++r) {
    if (b.at(r, col) == 0) return r;
  }
  return -1;
}

// Contiguous pieces of `mark` adjacent to (r, c) along one axis, both ways.
int run_through(const GridBoard& b, int r, int c, int dr, int dc, std::int8_t mark) {
  int n = 0;
  for (int s : {1, -1}) {
    int rr = r + s * dr, cc = c + s * dc;
    while (inside(rr, cc) && b.at(rr, cc) == mark) {
      ++n;
      rr += s * dr;
      cc += s * dc;
    }
  }
  return n;
}

bool completes_four(const GridBoard& b, int r, int c, std::int8_t mark) {
  return std::any_of(kDirections.begin(), kDirections.end(), [&](auto d) {
    return run_through(b, r, c, d.first, d.second, mark) >= 3;
  });
}

class ConnectFour final : public Game {
 public:
  explicit ConnectFour(int max_steps)
      : Game(GameSpec{"connect4", 2, InitMode::FixedInit, max_steps,
                      {{"rows", kRows}, {"cols", kCols}}}) {}

  Board initial_board(std::uint64_t) const override {
    GridBoard b;
    b.rows = kRows;
    b.cols = kCols;
    b.cells.assign(kRows * kCols, 0);
    return b;
  }

  std::vector<Move> legal_moves(const GameState& state) const override {
    const auto& b = std::get<GridBoard>(state.board);
    std::vector<Move> moves;
    for (int c = 0; c < kCols; ++c) {
      if (b.at(kRows - 1, c) == 0) moves.push_back(Move{0, c, 0});
    }
    return moves;
  }

  std::string format_move(const Move& m) const override {
    return "[col " + std::to_string(m.x) + "]";
  }

  std::optional<Move> parse_move(std::string_view raw) const override {
    auto body = grammar::bracket_body(raw);
    if (!body) return std::nullopt;
    auto words = grammar::split_words(*body);
    if (words.size() != 2 || !grammar::iequals(words[0], "col")) return std::nullopt;
    auto n = grammar::parse_int(words[1]);
    if (!n || *n < 0 || *n >= kCols) return std::nullopt;
    return Move{0, *n, 0};
  }

  void apply(GameState& state, const Move& m) const override {
    auto& b = std::get<GridBoard>(state.board);
    const int me = state.current_player;
    const auto mark = static_cast<std::int8_t>(me + 1);
    const int r = landing_row(b, m.x);
    const bool wins = completes_four(b, r, m.x, mark);
    b.at(r, m.x) = mark;
    if (wins) {
      state.terminal = true;
      state.outcome[static_cast<std::size_t>(me)] = StepOutcome::Win;
      state.outcome[static_cast<std::size_t>(1 - me)] = StepOutcome::Lose;
      return;
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
    const int c = m.x;
    const int r = landing_row(b, c);

    sink.add(tag("col"), c);
    sink.add(tag("height"), r);
    bool win = false, block = false;
    for (std::size_t d = 0; d < kDirections.size(); ++d) {
      const auto [dr, dc] = kDirections[d];
      const int own_run = std::min(run_through(b, r, c, dr, dc, own), 3);
      const int opp_run = std::min(run_through(b, r, c, dr, dc, opp), 3);
      sink.add(tag("own_run"), own_run);
      sink.add(tag("opp_run"), opp_run);
      win = win || own_run >= 3;
      block = block || opp_run >= 3;
    }
    if (win) sink.add(tag("win_now"));
    if (block) sink.add(tag("block"));

    // Open four-cell windows through the landing cell.
    for (const auto& [dr, dc] : kDirections) {
      for (int start = -3; start <= 0; ++start) {
        int n_own = 0, n_opp = 0;
        bool ok = true;
        for (int k = 0; k < 4 && ok; ++k) {
          const int rr = r + (start + k) * dr, cc = c + (start + k) * dc;
          if (!inside(rr, cc)) {
            ok = false;
            break;
          }
          n_own += b.at(rr, cc) == own;
          n_opp += b.at(rr, cc) == opp;
        }
        if (!ok) continue;
        if (n_opp == 0) sink.add(tag("open_own"), n_own);
        if (n_own == 0 && n_opp > 0) sink.add(tag("open_opp"), n_opp);
      }
    }

    // Playing here lets the opponent drop a winning disc on top.
    if (!win && r + 1 < kRows) {
      GridBoard after = b;
      after.at(r, c) = own;
      if (completes_four(after, r + 1, c, opp)) sink.add(tag("gift"));
    }
  }
};

}  // namespace

std::shared_ptr<const Game> make_connect_four(int max_steps) {
  return std::make_shared<ConnectFour>(max_steps);
}

}  // namespace dfc
