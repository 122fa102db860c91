#pragma once

// Trajectory-level rewards: format reward, environment reward and the
// hasty-action step reward that scales wins by 1 / n_steps.

#include <span>
#include <stdexcept>

#include "dfc/games.hpp"

namespace dfc {

class RewardError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr double kFormatPenalty = -2.0;

enum class RewardMode { StepShaped, EnvOnly };

struct RewardBreakdown {
  double r_format = 0.0;  // -2 or 0
  double r_env = 0.0;     // -1, 0 or 1
  double r_step = 0.0;
  int n_steps = 1;
};

// -2 if any emitted action is a FormatError, else 0. Throws on an empty list.
double format_reward(std::span<const ActionToken> emitted);

// Win -> 1, Draw -> 0, Lose -> -1. Throws on Ongoing.
double env_reward(StepOutcome outcome);

// r_format if r_format < 0; r_env / n_steps if r_env > 0; r_env otherwise.
double step_reward(double r_format, double r_env, int n_steps);

RewardBreakdown make_breakdown(double r_format, double r_env, int n_steps);

// StepShaped -> r_step. EnvOnly -> r_format if negative, else r_env.
double total_reward(const RewardBreakdown& breakdown, RewardMode mode);

}  // namespace dfc
