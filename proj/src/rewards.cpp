#include "dfc/rewards.hpp"

#include <algorithm>
#include <string>

namespace dfc {

double format_reward(std::span<const ActionToken> emitted) {
  if (emitted.empty()) throw RewardError("format_reward: trajectory has no emitted actions");
  const bool bad = std::any_of(emitted.begin(), emitted.end(),
                               [](const ActionToken& t) { return t.format_error(); });
  return bad ? kFormatPenalty : 0.0;
}

double env_reward(StepOutcome outcome) {
  switch (outcome) {
    case StepOutcome::Win: return 1.0;
    case StepOutcome::Draw: return 0.0;
    case StepOutcome::Lose: return -1.0;
    case StepOutcome::Ongoing: break;
  }
  throw RewardError("env_reward: outcome is not terminal");
}

double step_reward(double r_format, double r_env, int n_steps) {
  if (n_steps < 1) throw RewardError("step_reward: n_steps must be >= 1, got " + std::to_string(n_steps));
  if (r_format < 0.0) return r_format;
  if (r_env > 0.0) return r_env / static_cast<double>(n_steps);
  return r_env;
}

RewardBreakdown make_breakdown(double r_format, double r_env, int n_steps) {
  if (r_format != 0.0 && r_format != kFormatPenalty) {
    throw RewardError("r_format must be 0 or -2");
  }
  if (r_env != -1.0 && r_env != 0.0 && r_env != 1.0) throw RewardError("r_env must be -1, 0 or 1");
  return {r_format, r_env, step_reward(r_format, r_env, n_steps), n_steps};
}

double total_reward(const RewardBreakdown& breakdown, RewardMode mode) {
  if (mode == RewardMode::StepShaped) return breakdown.r_step;
  return breakdown.r_format < 0.0 ? breakdown.r_format : breakdown.r_env;
}

}  // namespace dfc
