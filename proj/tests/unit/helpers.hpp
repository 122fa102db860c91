#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>

#include "dfc/games.hpp"

namespace dfc::testing {

// Applies canonical actions in order; every one must be legal.
inline GameState play(GameState state, std::initializer_list<std::string_view> actions) {
  for (auto a : actions) state = step(state, parse_action(state, a)).state;
  return state;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("dfc_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace dfc::testing
