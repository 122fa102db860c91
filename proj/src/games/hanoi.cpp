#include "dfc/games.hpp"

namespace dfc {
namespace {

constexpr std::array<std::pair<int, int>, 6> kPegPairs = {
    std::pair{0, 1}, std::pair{0, 2}, std::pair{1, 0},
    std::pair{1, 2}, std::pair{2, 0}, std::pair{2, 1}};

char peg_name(int p) { return static_cast<char>('A' + p); }

std::optional<int> peg_index(std::string_view w) {
  if (w.size() != 1) return std::nullopt;
  const char c = static_cast<char>(w[0] & ~0x20);  // upper-case
  if (c < 'A' || c > 'C') return std::nullopt;
  return c - 'A';
}

// All disks start on peg A; the goal is to stack them on peg C.
class Hanoi final : public Game {
 public:
  Hanoi(int max_steps, int disks)
      : Game(GameSpec{"hanoi" + std::to_string(disks), 1, InitMode::FixedInit, max_steps,
                      {{"disks", disks}}}),
        disks_(disks) {}

  Board initial_board(std::uint64_t) const override {
    HanoiBoard b;
    for (int d = disks_; d >= 1; --d) b.pegs[0].push_back(d);
    return b;
  }

  std::vector<Move> legal_moves(const GameState& state) const override {
    const auto& b = std::get<HanoiBoard>(state.board);
    std::vector<Move> moves;
    for (auto [from, to] : kPegPairs) {
      const auto& src = b.pegs[static_cast<std::size_t>(from)];
      const auto& dst = b.pegs[static_cast<std::size_t>(to)];
      if (src.empty()) continue;
      if (!dst.empty() && dst.back() < src.back()) continue;
      moves.push_back(Move{0, from, to});
    }
    return moves;
  }

  std::string format_move(const Move& m) const override {
    return std::string{'[', peg_name(m.x), ' ', peg_name(m.y), ']'};
  }

  std::optional<Move> parse_move(std::string_view raw) const override {
    auto body = grammar::bracket_body(raw);
    if (!body) return std::nullopt;
    auto words = grammar::split_words(*body);
    if (words.size() != 2) return std::nullopt;
    auto from = peg_index(words[0]);
    auto to = peg_index(words[1]);
    if (!from || !to || *from == *to) return std::nullopt;
    return Move{0, *from, *to};
  }

  void apply(GameState& state, const Move& m) const override {
    auto& b = std::get<HanoiBoard>(state.board);
    auto& src = b.pegs[static_cast<std::size_t>(m.x)];
    auto& dst = b.pegs[static_cast<std::size_t>(m.y)];
    dst.push_back(src.back());
    src.pop_back();
    b.last_from = m.x;
    b.last_to = m.y;
    if (static_cast<int>(b.pegs[2].size()) == disks_) {
      state.terminal = true;
      state.outcome = {StepOutcome::Win, StepOutcome::Ongoing};
    }
  }

  void describe(const GameState& state, const Move& m, TokenSink& sink) const override {
    const auto& b = std::get<HanoiBoard>(state.board);
    // Peg of each disk, base 3: identifies the configuration exactly.
    std::uint64_t code = 0;
    for (int d = 1; d <= disks_; ++d) {
      int where = 0;
      for (int p = 0; p < 3; ++p) {
        for (int x : b.pegs[static_cast<std::size_t>(p)]) {
          if (x == d) where = p;
        }
      }
      code = code * 3 + static_cast<std::uint64_t>(where);
    }
    const int disk = b.pegs[static_cast<std::size_t>(m.x)].back();
    sink.add(tag("config_move"), code, m.x, m.y);
    sink.add(tag("disk_move"), disk, m.x, m.y);
    sink.add(tag("undo"), m.x == b.last_to && m.y == b.last_from);
  }

 private:
  int disks_;
};

}  // namespace

std::shared_ptr<const Game> make_hanoi(int max_steps, int disks) {
  if (disks < 1 || disks > 10) throw GameError("hanoi disk count must be in 1..10");
  return std::make_shared<Hanoi>(max_steps, disks);
}

}  // namespace dfc
