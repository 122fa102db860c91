#pragma once

// The conquer loop: self-play rollouts with the best policy, trajectory
// rewards, half-negative filtering, one GRPO step per iteration and
// win-rate-gated best-policy retention.

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dfc/config.hpp"
#include "dfc/games.hpp"
#include "dfc/grpo.hpp"
#include "dfc/policy.hpp"
#include "dfc/rewards.hpp"
#include "dfc/scheduler.hpp"

namespace dfc {

// What an actor hands back for the current player: the raw action string,
// and, for the learner, the decision record used by the loss.
struct ActorChoice {
  std::string raw;
  std::optional<LearnerStep> learner;
};

using Actor = std::function<ActorChoice(const GameState&, Rng&)>;

enum class PolicyMode { Sample, Greedy };

struct PolicyActorOptions {
  PolicyMode mode = PolicyMode::Sample;
  double epsilon = 0.0;
  bool distractors = true;
  bool record = false;  // attach LearnerStep records
};

// The policy/featurizer must outlive the returned actor.
Actor policy_actor(const PolicyParams& params, const Featurizer& featurizer,
                   PolicyActorOptions options);

struct PlayedStep {
  int player = 0;
  std::string raw;
  bool format_ok = true;
  bool learner = false;
  double behavior_logprob = 0.0;  // meaningful for learner steps only
  StepOutcome outcome = StepOutcome::Ongoing;  // for the mover, after the step
};

struct Trajectory {
  std::string game_id;
  std::uint64_t seed = 0;
  int learner_role = 0;
  std::vector<PlayedStep> steps;           // every emitted action, in order
  std::vector<LearnerStep> learner_steps;  // learner decisions only
  int n_steps = 0;
  std::array<StepOutcome, 2> outcome{StepOutcome::Ongoing, StepOutcome::Ongoing};
  StepOutcome learner_outcome = StepOutcome::Ongoing;
  RewardBreakdown reward;
  double scalar_reward = 0.0;  // training signal under the configured mode

  int learner_actions() const;
  int learner_format_errors() const;
};

// Plays one episode. actors[p] moves for player p; single-player games only
// use actors[0]. A FormatError action forfeits the episode for its emitter.
Trajectory play_episode(const std::shared_ptr<const Game>& game, std::uint64_t seed,
                        int learner_role, const std::array<const Actor*, 2>& actors, Rng& rng);

struct RewardOptions {
  bool format_reward = true;
  RewardMode mode = RewardMode::StepShaped;
};

// Fills trajectory.reward and trajectory.scalar_reward.
void score_trajectory(Trajectory& trajectory, const RewardOptions& options);

struct RolloutOptions {
  double epsilon = 0.05;
  bool distractors = true;
};

// r self-play episodes from one seed with the best policy. In two-player
// games the learner plays player 0 on even episodes and player 1 on odd
// ones; the opponent is the same policy sampling with epsilon 0.
std::vector<Trajectory> rollout_game(const PolicyParams& best, const Featurizer& featurizer,
                                     const std::shared_ptr<const Game>& game, std::uint64_t seed,
                                     int r, const RolloutOptions& options, Rng& rng);

// Learner win fraction per game.
std::map<std::string, double> compute_wrc(const std::vector<Trajectory>& trajectories);
// Fraction of learner actions that parse, per game; 1.0 when a game has none.
std::map<std::string, double> compute_gf(const std::vector<Trajectory>& trajectories);

// Win rate of `candidate` (greedy) against `opponent` (sampling, epsilon 0)
// over `seeds` seeds per game and both roles in two-player games.
WinRateTable match_win_rates(const PolicyParams& candidate, const PolicyParams& opponent,
                             const Featurizer& featurizer, const GameRegistry& registry,
                             const std::vector<std::string>& games, int seeds,
                             std::uint64_t seed_base, bool distractors);

struct IterationMetrics {
  int iteration = 0;
  std::map<std::string, double> wrc;      // self-play learner win rate
  std::map<std::string, double> gf;       // good-format ratio
  std::map<std::string, double> gate_wr;  // candidate win rate used by the gate
  std::map<std::string, int> seeds;       // rollout seeds allocated
  double mean_steps = 0.0;
  double mean_reward = 0.0;  // mean r_step
  double loss = 0.0;
  double kl = 0.0;
  double epsilon = 0.0;
  int trajectories = 0;
  int kept = 0;  // after half-negative filtering
  int format_penalized = 0;
  int groups_used = 0;
  double candidate_avg_wr = 0.0;
  double best_avg_wr = 0.0;  // retained best after this iteration
  bool accepted = false;
  double wall_clock_s = 0.0;
};

struct ConquerOptions {
  std::string run_id = "run";
  std::string stream = "conquer";  // salts the random streams of this phase
  // Called after every iteration with (metrics, pi_t, best).
  std::function<void(const IterationMetrics&, const PolicyParams&, const PolicyParams&)>
      on_iteration;
  int iterations = 0;  // 0 means config.iterations
};

struct ConquerResult {
  PolicyParams best;
  std::vector<IterationMetrics> metrics;
  double baseline_avg_wr = 0.0;
  WinRateTable baseline_wr;
};

ConquerResult conquer(const GameRegistry& registry, const std::vector<std::string>& games,
                      const PolicyParams& init_policy, const RunConfig& config,
                      const ConquerOptions& options = {});

}  // namespace dfc
