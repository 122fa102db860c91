#include "dfc/trainer.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

namespace dfc {

int Trajectory::learner_actions() const {
  int n = 0;
  for (const auto& s : steps) n += s.learner;
  return n;
}

int Trajectory::learner_format_errors() const {
  int n = 0;
  for (const auto& s : steps) n += s.learner && !s.format_ok;
  return n;
}

Actor policy_actor(const PolicyParams& params, const Featurizer& featurizer,
                   PolicyActorOptions options) {
  if (params.dim() != featurizer.dim()) {
    throw PolicyError("policy dimension " + std::to_string(params.dim()) +
                      " does not match feature dimension " + std::to_string(featurizer.dim()));
  }
  return [&params, &featurizer, options](const GameState& state, Rng& rng) {
    Decision d = make_decision(featurizer, state, options.distractors);
    std::size_t index = 0;
    double logprob = 0.0;
    if (options.mode == PolicyMode::Greedy) {
      index = greedy_action(params, d);
      if (options.record) logprob = log_softmax(logits(params, d))[index];
    } else {
      const SampledAction s = sample_action(params, d, rng, options.epsilon);
      index = s.index;
      logprob = s.logprob;
    }
    ActorChoice choice{d.actions[index], std::nullopt};
    if (options.record) choice.learner = LearnerStep{std::move(d), index, logprob};
    return choice;
  };
}

Trajectory play_episode(const std::shared_ptr<const Game>& game, std::uint64_t seed,
                        int learner_role, const std::array<const Actor*, 2>& actors, Rng& rng) {
  Trajectory t;
  t.game_id = game->spec().game_id;
  t.seed = seed;
  t.learner_role = learner_role;
  const bool two_player = game->spec().players == 2;
  GameState state = reset(game, seed);
  while (!state.terminal) {
    const int player = state.current_player;
    const Actor* actor = actors[static_cast<std::size_t>(two_player ? player : 0)];
    ActorChoice choice = (*actor)(state, rng);
    const ActionToken token = parse_action(state, choice.raw);

    PlayedStep ps;
    ps.player = player;
    ps.raw = std::move(choice.raw);
    ps.format_ok = !token.format_error();
    ps.learner = player == learner_role;
    if (ps.learner && choice.learner) {
      ps.behavior_logprob = choice.learner->behavior_logprob;
      t.learner_steps.push_back(std::move(*choice.learner));
    }
    StepResult next = token.format_error() ? forfeit(state) : step(state, token);
    ps.outcome = next.outcome;
    state = std::move(next.state);
    t.steps.push_back(std::move(ps));
  }
  t.n_steps = state.step_count;
  t.outcome = state.outcome;
  t.learner_outcome = state.outcome[static_cast<std::size_t>(learner_role)];
  return t;
}

void score_trajectory(Trajectory& t, const RewardOptions& options) {
  const bool bad_format = t.learner_format_errors() > 0;
  const double r_format = options.format_reward && bad_format ? kFormatPenalty : 0.0;
  t.reward = make_breakdown(r_format, env_reward(t.learner_outcome), std::max(t.n_steps, 1));
  t.scalar_reward = total_reward(t.reward, options.mode);
}

std::vector<Trajectory> rollout_game(const PolicyParams& best, const Featurizer& featurizer,
                                     const std::shared_ptr<const Game>& game, std::uint64_t seed,
                                     int r, const RolloutOptions& options, Rng& rng) {
  if (r < 1) throw std::invalid_argument("rollout_game: r must be >= 1");
  const Actor learner = policy_actor(
      best, featurizer, {PolicyMode::Sample, options.epsilon, options.distractors, true});
  const Actor opponent =
      policy_actor(best, featurizer, {PolicyMode::Sample, 0.0, options.distractors, false});
  const bool two_player = game->spec().players == 2;
  std::vector<Trajectory> out;
  out.reserve(static_cast<std::size_t>(r));
  for (int i = 0; i < r; ++i) {
    const int role = two_player ? i % 2 : 0;
    const std::array<const Actor*, 2> actors =
        role == 0 ? std::array<const Actor*, 2>{&learner, &opponent}
                  : std::array<const Actor*, 2>{&opponent, &learner};
    out.push_back(play_episode(game, seed, role, actors, rng));
  }
  return out;
}

std::map<std::string, double> compute_wrc(const std::vector<Trajectory>& trajectories) {
  std::map<std::string, std::pair<int, int>> counts;
  for (const auto& t : trajectories) {
    auto& [wins, total] = counts[t.game_id];
    wins += t.learner_outcome == StepOutcome::Win;
    total += 1;
  }
  std::map<std::string, double> out;
  for (const auto& [g, c] : counts) out[g] = static_cast<double>(c.first) / c.second;
  return out;
}

std::map<std::string, double> compute_gf(const std::vector<Trajectory>& trajectories) {
  std::map<std::string, std::pair<int, int>> counts;
  for (const auto& t : trajectories) {
    auto& [good, total] = counts[t.game_id];
    for (const auto& s : t.steps) {
      if (!s.learner) continue;
      good += s.format_ok;
      total += 1;
    }
  }
  std::map<std::string, double> out;
  for (const auto& [g, c] : counts) {
    out[g] = c.second == 0 ? 1.0 : static_cast<double>(c.first) / c.second;
  }
  return out;
}

WinRateTable match_win_rates(const PolicyParams& candidate, const PolicyParams& opponent,
                             const Featurizer& featurizer, const GameRegistry& registry,
                             const std::vector<std::string>& games, int seeds,
                             std::uint64_t seed_base, bool distractors) {
  const Actor cand = policy_actor(candidate, featurizer, {PolicyMode::Greedy, 0.0, distractors, false});
  const Actor opp = policy_actor(opponent, featurizer, {PolicyMode::Sample, 0.0, distractors, false});
  WinRateTable table;
  for (const auto& id : games) {
    const auto game = registry.find(id);
    const bool two_player = game->spec().players == 2;
    int wins = 0, total = 0;
    for (int k = 0; k < seeds; ++k) {
      const std::uint64_t seed = mix_seed(seed_base, hash_string(id), k);
      for (int role = 0; role < (two_player ? 2 : 1); ++role) {
        Rng rng(mix_seed(seed, role, 0x9a7e));
        const std::array<const Actor*, 2> actors =
            role == 0 ? std::array<const Actor*, 2>{&cand, &opp}
                      : std::array<const Actor*, 2>{&opp, &cand};
        const Trajectory t = play_episode(game, seed, role, actors, rng);
        wins += t.learner_outcome == StepOutcome::Win;
        ++total;
      }
    }
    table[id] = static_cast<double>(wins) / total;
  }
  return table;
}

namespace {

double mean_of(const WinRateTable& table) {
  double s = 0.0;
  for (const auto& [g, v] : table) s += v;
  return table.empty() ? 0.0 : s / static_cast<double>(table.size());
}

// Self-play win rate of `policy` over `seeds` seeds x r episodes per game.
WinRateTable self_play_win_rates(const PolicyParams& policy, const Featurizer& featurizer,
                                 const GameRegistry& registry, const std::vector<std::string>& games,
                                 const RunConfig& cfg, std::uint64_t seed_base) {
  std::vector<Trajectory> all;
  for (const auto& id : games) {
    const auto game = registry.find(id);
    for (int k = 0; k < cfg.gate_seeds; ++k) {
      const std::uint64_t seed = mix_seed(seed_base, hash_string(id), k);
      Rng rng(mix_seed(seed, 0x5e1f));
      auto batch = rollout_game(policy, featurizer, game, seed, cfg.group_size,
                                {cfg.effective_epsilon(), cfg.distractors}, rng);
      for (auto& t : batch) all.push_back(std::move(t));
    }
  }
  return compute_wrc(all);
}

}  // namespace

ConquerResult conquer(const GameRegistry& registry, const std::vector<std::string>& games,
                      const PolicyParams& init_policy, const RunConfig& cfg,
                      const ConquerOptions& options) {
  cfg.validate();
  if (games.empty()) throw std::invalid_argument("conquer: empty game group");
  for (const auto& g : games) registry.find(g);
  const Featurizer featurizer(cfg.feature_dim, cfg.feature_seed);
  if (init_policy.dim() != featurizer.dim()) {
    throw PolicyError("conquer: initial policy has dimension " + std::to_string(init_policy.dim()) +
                      ", config D is " + std::to_string(cfg.feature_dim));
  }
  const int T = options.iterations > 0 ? options.iterations : cfg.iterations;
  const std::uint64_t base = mix_seed(cfg.master_seed, hash_string(options.stream));
  const std::uint64_t gate_base = mix_seed(base, hash_string("gate"));
  const GrpoConfig grpo_cfg = cfg.grpo();
  const MpsConfig mps_cfg = cfg.mps();
  const RewardOptions reward_opts{cfg.toggles.fr, cfg.reward_mode};
  const RolloutOptions rollout_opts{cfg.effective_epsilon(), cfg.distractors};
  const int budget = cfg.seeds_per_game * static_cast<int>(games.size());

  const PolicyParams& initial = init_policy;
  PolicyParams best = init_policy;

  auto gate_table = [&](const PolicyParams& candidate) {
    return match_win_rates(candidate, initial, featurizer, registry, games, cfg.gate_seeds,
                           gate_base, cfg.distractors);
  };

  ConquerResult result;
  result.baseline_wr = cfg.gate == GateMode::VersusInitial
                           ? gate_table(initial)
                           : self_play_win_rates(initial, featurizer, registry, games, cfg, gate_base);
  result.baseline_avg_wr = mean_of(result.baseline_wr);
  double best_avg = result.baseline_avg_wr;
  WinRateTable wr_table = result.baseline_wr;

  for (int t = 1; t <= T; ++t) {
    const auto started = std::chrono::steady_clock::now();
    Rng iter_rng(mix_seed(base, t));
    IterationMetrics m;
    m.iteration = t;
    m.epsilon = rollout_opts.epsilon;
    m.seeds = cfg.toggles.mps ? allocate_seeds(wr_table, mps_cfg, budget)
                              : allocate_uniform(games, budget);

    std::vector<Trajectory> trajs;
    std::vector<RolloutGroup> groups;
    std::vector<std::size_t> group_of;
    for (const auto& id : games) {
      const auto game = registry.find(id);
      const int count = m.seeds.at(id);
      const std::vector<std::uint64_t> seeds =
          cfg.toggles.rs ? draw_rollout_seeds(id, count, iter_rng)
                         : std::vector<std::uint64_t>(static_cast<std::size_t>(count),
                                                      mix_seed(cfg.master_seed, hash_string(id)));
      for (int k = 0; k < count; ++k) {
        const std::uint64_t seed = seeds[static_cast<std::size_t>(k)];
        Rng ep_rng(mix_seed(base, t, hash_string(id), k));
        auto batch = rollout_game(best, featurizer, game, seed, cfg.group_size, rollout_opts, ep_rng);
        groups.push_back(RolloutGroup{id, seed, {}});
        for (auto& traj : batch) {
          score_trajectory(traj, reward_opts);
          trajs.push_back(std::move(traj));
          group_of.push_back(groups.size() - 1);
        }
      }
    }

    m.wrc = compute_wrc(trajs);
    m.gf = compute_gf(trajs);
    m.trajectories = static_cast<int>(trajs.size());
    double steps_sum = 0.0, reward_sum = 0.0;
    for (const auto& tr : trajs) {
      steps_sum += tr.n_steps;
      reward_sum += tr.reward.r_step;
      m.format_penalized += tr.reward.r_format < 0.0;
    }
    m.mean_steps = steps_sum / static_cast<double>(trajs.size());
    m.mean_reward = reward_sum / static_cast<double>(trajs.size());

    std::vector<std::size_t> keep(trajs.size());
    std::iota(keep.begin(), keep.end(), 0);
    if (cfg.toggles.hn) {
      std::vector<double> rewards;
      rewards.reserve(trajs.size());
      for (const auto& tr : trajs) rewards.push_back(tr.scalar_reward);
      keep = half_negative_keep(rewards, iter_rng);
    }
    m.kept = static_cast<int>(keep.size());
    for (std::size_t i : keep) {
      groups[group_of[i]].members.push_back(GroupMember{trajs[i].learner_steps, trajs[i].scalar_reward});
    }

    const GrpoResult g = grpo_objective(best, best, groups, grpo_cfg);
    m.loss = g.loss;
    m.kl = g.kl;
    m.groups_used = g.num_groups;
    PolicyParams candidate = apply_update(best, g.gradient, grpo_cfg.learning_rate);
    candidate.meta.note = "iteration";
    candidate.meta.iteration = t;

    m.gate_wr = cfg.gate == GateMode::VersusInitial ? gate_table(candidate) : m.wrc;
    m.candidate_avg_wr = mean_of(m.gate_wr);
    if (m.candidate_avg_wr >= best_avg) {
      m.accepted = true;
      best_avg = m.candidate_avg_wr;
      best = candidate;
      wr_table = m.gate_wr;
    } else if (cfg.gate == GateMode::TrainingRollouts) {
      wr_table = m.wrc;
    }
    m.best_avg_wr = best_avg;
    if (cfg.record_wall_clock) {
      m.wall_clock_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    }
    if (options.on_iteration) options.on_iteration(m, candidate, best);
    result.metrics.push_back(std::move(m));
  }

  best.meta.lineage.push_back("conquer:" + options.run_id);
  best.meta.note = "conquer " + options.run_id;
  result.best = std::move(best);
  return result;
}

}  // namespace dfc
