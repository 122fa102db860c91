#pragma once

// Run configuration: a flat `key = value` text file. Unknown keys, malformed
// values and out-of-range numbers are errors.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dfc/grpo.hpp"
#include "dfc/rewards.hpp"
#include "dfc/scheduler.hpp"

namespace dfc {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Stabilisation toggles. The hasty-action penalty toggle is reward_mode.
struct Toggles {
  bool fr = true;   // format reward shaping
  bool mps = true;  // mixed prioritized sampling
  bool hn = true;   // half-negative filtering
  bool eg = true;   // epsilon-greedy disturbance
  bool rs = true;   // randomized rollout seeds
};

// How the best-policy gate measures the average win rate of a candidate.
enum class GateMode {
  VersusInitial,     // greedy candidate vs. the conquer phase's initial policy
  TrainingRollouts,  // win rate of the iteration's self-play rollouts
};

struct RunConfig {
  std::vector<std::string> games = {"guess_number", "hanoi3",     "hanoi4",    "tictactoe",
                                    "connect4",     "liars_dice", "kuhn_poker"};
  int feature_dim = 256;
  int iterations = 100;             // T per conquer phase
  int specialist_iterations = 0;    // per-group specialists; 0 means `iterations`
  int seeds_per_game = 50;          // S
  int group_size = 8;               // r
  double mps_a = 0.2;
  double mps_b = 0.8;
  double mps_eps1 = 0.1;
  double epsilon = 0.05;
  double clip_eps = 0.1;
  double kl_alpha = 0.1;
  double learning_rate = 1.0;
  double std_floor = 1e-8;
  int max_steps = kDefaultMaxSteps;
  std::uint64_t feature_seed = 0;
  std::uint64_t master_seed = 0;
  RewardMode reward_mode = RewardMode::StepShaped;
  Toggles toggles;
  bool distractors = true;
  GateMode gate = GateMode::VersusInitial;
  int gate_seeds = 20;
  int probe_trials = 100;
  int eval_seeds = 20;
  // Divide cells in training order; names from divide_cell_name().
  std::vector<std::string> group_order = {"winnable-fixed", "winnable-random",
                                          "unwinnable-fixed", "unwinnable-random"};
  std::string run_id = "run";
  bool record_wall_clock = false;

  void validate() const;

  MpsConfig mps() const;
  GrpoConfig grpo() const;
  double effective_epsilon() const { return toggles.eg ? epsilon : 0.0; }
  int specialist_T() const { return specialist_iterations > 0 ? specialist_iterations : iterations; }
};

RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);
// Applies one `key = value` assignment; used by the parser and CLI overrides.
void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value);
// Canonical text form: every key, fixed order, round-trips through parse_config.
std::string to_text(const RunConfig& cfg);
// FNV-1a of the canonical text, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

// Applies DFC_ARENA_SEED from the environment, if set.
void apply_environment(RunConfig& cfg);

std::string_view to_string(RewardMode mode);
std::string_view to_string(GateMode mode);

}  // namespace dfc
