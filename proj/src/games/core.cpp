#include <algorithm>
#include <cctype>
#include <charconv>

#include "dfc/games.hpp"

namespace dfc {

std::string_view to_string(InitMode mode) {
  return mode == InitMode::FixedInit ? "FixedInit" : "RandomInit";
}

std::string_view to_string(StepOutcome outcome) {
  switch (outcome) {
    case StepOutcome::Ongoing: return "Ongoing";
    case StepOutcome::Win: return "Win";
    case StepOutcome::Draw: return "Draw";
    case StepOutcome::Lose: return "Lose";
  }
  return "Ongoing";
}

const GameSpec& GameState::spec() const {
  if (!game) throw GameError("game state has no game attached");
  return game->spec();
}

bool operator==(const GameState& a, const GameState& b) {
  if ((a.game == nullptr) != (b.game == nullptr)) return false;
  if (a.game && a.game->spec().game_id != b.game->spec().game_id) return false;
  return a.current_player == b.current_player && a.step_count == b.step_count &&
         a.terminal == b.terminal && a.outcome == b.outcome && a.board == b.board;
}

void GameRegistry::add(std::shared_ptr<const Game> game) {
  if (!game) throw GameError("cannot register a null game");
  if (contains(game->spec().game_id)) {
    throw GameError("duplicate game id: " + game->spec().game_id);
  }
  games_.push_back(std::move(game));
}

std::shared_ptr<const Game> GameRegistry::find(std::string_view game_id) const {
  for (const auto& g : games_) {
    if (g->spec().game_id == game_id) return g;
  }
  throw GameError("unknown game id: " + std::string(game_id));
}

bool GameRegistry::contains(std::string_view game_id) const {
  return std::any_of(games_.begin(), games_.end(),
                     [&](const auto& g) { return g->spec().game_id == game_id; });
}

std::vector<std::string> GameRegistry::ids() const {
  std::vector<std::string> out;
  out.reserve(games_.size());
  for (const auto& g : games_) out.push_back(g->spec().game_id);
  return out;
}

GameRegistry register_builtin_games(int max_steps) {
  if (max_steps < 1) throw GameError("max_steps must be >= 1");
  GameRegistry registry;
  registry.add(make_guess_number(max_steps));
  registry.add(make_hanoi(max_steps, 3));
  registry.add(make_hanoi(max_steps, 4));
  registry.add(make_tictactoe(max_steps));
  registry.add(make_connect_four(max_steps));
  registry.add(make_liars_dice(max_steps));
  registry.add(make_kuhn_poker(max_steps));
  return registry;
}

GameState reset(std::shared_ptr<const Game> game, std::uint64_t seed) {
  if (!game) throw GameError("reset: null game");
  GameState state;
  state.board = game->initial_board(seed);
  state.game = std::move(game);
  return state;
}

GameState reset(const GameRegistry& registry, std::string_view game_id, std::uint64_t seed) {
  return reset(registry.find(game_id), seed);
}

std::vector<std::string> legal_actions(const GameState& state) {
  if (state.terminal) throw GameError("legal_actions called on a terminal state");
  const Game& game = *state.game;
  std::vector<std::string> out;
  for (const Move& m : game.legal_moves(state)) out.push_back(game.format_move(m));
  return out;
}

ActionToken parse_action(const GameState& state, std::string_view raw) {
  ActionToken token{std::string(raw), std::nullopt};
  if (state.terminal) return token;
  const Game& game = *state.game;
  auto move = game.parse_move(raw);
  if (!move) return token;
  const auto legal = game.legal_moves(state);
  if (std::find(legal.begin(), legal.end(), *move) != legal.end()) token.parsed = move;
  return token;
}

namespace {

void apply_step_cap(GameState& state) {
  if (state.terminal || state.step_count < state.spec().max_steps) return;
  state.terminal = true;
  if (state.players() == 2) {
    state.outcome = {StepOutcome::Draw, StepOutcome::Draw};
  } else {
    state.outcome = {StepOutcome::Lose, StepOutcome::Ongoing};
  }
}

}  // namespace

StepResult step(const GameState& state, const ActionToken& token) {
  if (state.terminal) throw GameError("step called on a terminal state");
  if (token.format_error()) throw GameError("step called with a FormatError token: " + token.raw);
  const int mover = state.current_player;
  GameState next = state;
  state.game->apply(next, *token.parsed);
  next.step_count += 1;
  apply_step_cap(next);
  const StepOutcome outcome = next.terminal ? next.outcome[static_cast<std::size_t>(mover)]
                                            : StepOutcome::Ongoing;
  return {std::move(next), outcome};
}

StepResult forfeit(const GameState& state) {
  if (state.terminal) throw GameError("forfeit called on a terminal state");
  const int mover = state.current_player;
  GameState next = state;
  next.step_count += 1;
  next.terminal = true;
  if (next.players() == 2) {
    next.outcome[static_cast<std::size_t>(mover)] = StepOutcome::Lose;
    next.outcome[static_cast<std::size_t>(1 - mover)] = StepOutcome::Win;
  } else {
    next.outcome = {StepOutcome::Lose, StepOutcome::Ongoing};
  }
  return {std::move(next), StepOutcome::Lose};
}

namespace grammar {

namespace {
std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}
}  // namespace

std::optional<std::string_view> bracket_body(std::string_view raw) {
  raw = trim(raw);
  if (raw.size() < 2 || raw.front() != '[' || raw.back() != ']') return std::nullopt;
  auto body = trim(raw.substr(1, raw.size() - 2));
  if (body.empty() || body.find_first_of("[]") != std::string_view::npos) return std::nullopt;
  return body;
}

std::optional<int> parse_int(std::string_view text) {
  int value = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) return std::nullopt;
  return value;
}

std::vector<std::string_view> split_words(std::string_view text) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) words.push_back(text.substr(i, j - i));
    i = j;
  }
  return words;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

}  // namespace grammar
}  // namespace dfc
