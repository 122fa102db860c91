#include "dfc/orchestrator.hpp"

#include <algorithm>
#include <set>

#include "dfc/harness.hpp"
#include "json.hpp"

namespace dfc {

using nlohmann::json;

double probe_baseline(const PolicyParams& policy, const Featurizer& featurizer,
                      const GameRegistry& registry, const std::string& game_id, int trials,
                      std::uint64_t seed_base, bool distractors) {
  if (trials < 1) throw OrchestratorError("probe_baseline: trials must be >= 1");
  const auto game = registry.find(game_id);
  const bool two_player = game->spec().players == 2;
  const Actor learner = policy_actor(policy, featurizer, {PolicyMode::Sample, 0.0, distractors, false});
  const Actor opponent = random_actor();
  Rng seeds(mix_seed(seed_base, hash_string(game_id)));
  int wins = 0;
  for (int i = 0; i < trials; ++i) {
    const std::uint64_t seed = seeds();
    const int role = two_player ? i % 2 : 0;
    Rng rng(mix_seed(seed, i));
    const std::array<const Actor*, 2> actors =
        role == 0 ? std::array<const Actor*, 2>{&learner, &opponent}
                  : std::array<const Actor*, 2>{&opponent, &learner};
    wins += play_episode(game, seed, role, actors, rng).learner_outcome == StepOutcome::Win;
  }
  return static_cast<double>(wins) / trials;
}

ProbeTable probe_all(const PolicyParams& policy, const Featurizer& featurizer,
                     const GameRegistry& registry, const std::vector<std::string>& games,
                     int trials, std::uint64_t seed_base, bool distractors) {
  ProbeTable out;
  for (const auto& g : games) {
    out[g] = probe_baseline(policy, featurizer, registry, g, trials, seed_base, distractors);
  }
  return out;
}

std::vector<std::string> GroupPlan::all_games() const {
  std::vector<std::string> out;
  for (const auto& g : groups) out.insert(out.end(), g.games.begin(), g.games.end());
  return out;
}

std::string divide_cell_name(InitMode mode, bool winnable) {
  return std::string(winnable ? "winnable" : "unwinnable") +
         (mode == InitMode::FixedInit ? "-fixed" : "-random");
}

GroupPlan divide(const GameRegistry& registry, const std::vector<std::string>& games,
                 const ProbeTable& probes, const std::vector<std::string>& order) {
  std::set<std::string> cells;
  for (InitMode mode : {InitMode::FixedInit, InitMode::RandomInit}) {
    for (bool w : {true, false}) cells.insert(divide_cell_name(mode, w));
  }
  std::set<std::string> seen_order;
  for (const auto& name : order) {
    if (!cells.count(name)) throw OrchestratorError("unknown group name in group_order: " + name);
    if (!seen_order.insert(name).second) throw OrchestratorError("duplicate group name: " + name);
  }
  if (seen_order.size() != cells.size()) {
    throw OrchestratorError("group_order must name all four groups");
  }
  std::set<std::string> unique(games.begin(), games.end());
  if (unique.size() != games.size()) throw OrchestratorError("duplicate game in roster");

  GroupPlan plan;
  for (const auto& name : order) {
    PlanGroup group;
    group.name = name;
    for (const auto& id : games) {
      const auto it = probes.find(id);
      if (it == probes.end()) throw OrchestratorError("game " + id + " was not probed");
      const InitMode mode = registry.find(id)->spec().init_mode;
      if (divide_cell_name(mode, it->second > 0.0) == name) {
        group.init_mode = mode;
        group.winnable = it->second > 0.0;
        group.games.push_back(id);
      }
    }
    if (!group.games.empty()) plan.groups.push_back(std::move(group));
  }
  return plan;
}

namespace {

json plan_json(const GroupPlan& plan) {
  json groups = json::array();
  for (const auto& g : plan.groups) {
    groups.push_back({{"name", g.name},
                      {"init_mode", to_string(g.init_mode)},
                      {"winnable", g.winnable},
                      {"games", g.games}});
  }
  return groups;
}

std::string ckpt_name(const std::string& phase, const std::string& suffix) {
  return phase + "_" + suffix + ".ckpt";
}

}  // namespace

std::string plan_to_json(const GroupPlan& plan, const ProbeTable& probes, int indent) {
  json j;
  j["probes"] = probes;
  j["groups"] = plan_json(plan);
  return j.dump(indent);
}

GroupPlan plan_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    const json& groups = j.contains("plan") ? j.at("plan").at("groups") : j.at("groups");
    GroupPlan plan;
    for (const auto& g : groups) {
      PlanGroup group;
      group.name = g.at("name").get<std::string>();
      const auto mode = g.at("init_mode").get<std::string>();
      if (mode == "FixedInit") group.init_mode = InitMode::FixedInit;
      else if (mode == "RandomInit") group.init_mode = InitMode::RandomInit;
      else throw OrchestratorError("unknown init_mode '" + mode + "' in plan");
      group.winnable = g.at("winnable").get<bool>();
      group.games = g.at("games").get<std::vector<std::string>>();
      if (group.games.empty()) throw OrchestratorError("plan group " + group.name + " is empty");
      plan.groups.push_back(std::move(group));
    }
    if (plan.groups.empty()) throw OrchestratorError("plan has no groups");
    return plan;
  } catch (const json::exception& e) {
    throw OrchestratorError(std::string("malformed plan: ") + e.what());
  }
}

PhaseResult run_conquer_phase(const GameRegistry& registry, const std::vector<std::string>& games,
                              const PolicyParams& init, const RunConfig& config,
                              const std::string& phase_id, const std::string& kind,
                              const std::string& stream, int iterations,
                              const ArtifactOptions& artifacts) {
  const bool files = !artifacts.directory.empty();
  ConquerOptions opts;
  opts.run_id = phase_id;
  opts.stream = stream;
  opts.iterations = iterations;
  opts.on_iteration = [&](const IterationMetrics& m, const PolicyParams& candidate,
                          const PolicyParams& best) {
    if (files) {
      if (artifacts.checkpoint_every_iteration) {
        save_checkpoint(artifacts.directory / ckpt_name(phase_id, std::to_string(m.iteration)), candidate);
      }
      if (m.accepted) save_checkpoint(artifacts.directory / ckpt_name(phase_id, "best"), best);
    }
    if (artifacts.metrics) artifacts.metrics->write({config.run_id, phase_id, m});
    if (artifacts.on_iteration) artifacts.on_iteration(phase_id, m);
  };
  ConquerResult r = conquer(registry, games, init, config, opts);

  PhaseResult out;
  out.id = phase_id;
  out.kind = kind;
  out.games = games;
  out.policy = std::move(r.best);
  out.metrics = std::move(r.metrics);
  out.baseline_avg_wr = r.baseline_avg_wr;
  if (files) {
    out.checkpoint = artifacts.directory / ckpt_name(phase_id, "final");
    save_checkpoint(out.checkpoint, out.policy);
  }
  return out;
}

DfcResult dfc_run(const GameRegistry& registry, const RunConfig& config,
                  const std::optional<GroupPlan>& plan, const ArtifactOptions& artifacts) {
  config.validate();
  const Featurizer featurizer(config.feature_dim, config.feature_seed);
  DfcResult result;
  result.initial = init_params(config.feature_dim, config.master_seed);
  result.initial.meta.note = "initial";
  if (!artifacts.directory.empty()) {
    save_checkpoint(artifacts.directory / (config.run_id + ".init.ckpt"), result.initial);
  }

  if (plan) {
    result.plan = *plan;
  } else {
    result.probes = probe_all(result.initial, featurizer, registry, config.games, config.probe_trials,
                              mix_seed(config.master_seed, hash_string("probe")), config.distractors);
    result.plan = divide(registry, config.games, result.probes, config.group_order);
  }
  if (result.plan.groups.empty()) throw OrchestratorError("dfc_run: plan has no groups");
  {
    std::set<std::string> seen;
    for (const auto& g : result.plan.all_games()) {
      registry.find(g);
      if (!seen.insert(g).second) throw OrchestratorError("dfc_run: game " + g + " is in two groups");
    }
  }

  const auto& groups = result.plan.groups;
  for (std::size_t k = 0; k < groups.size(); ++k) {
    const std::string id = config.run_id + ".g" + std::to_string(k + 1);
    result.phases.push_back(run_conquer_phase(registry, groups[k].games, result.initial, config, id,
                                              "specialist", "specialist:" + groups[k].name,
                                              config.specialist_T(), artifacts));
    result.specialists.push_back(result.phases.back().policy);
  }

  PolicyParams current = result.specialists.front();
  std::vector<std::string> covered = groups.front().games;
  for (std::size_t k = 1; k < groups.size(); ++k) {
    PhaseResult fused;
    fused.id = config.run_id + ".f" + std::to_string(k + 1);
    fused.kind = "fuse";
    fused.policy = fuse(result.specialists[k], current);
    fused.policy.meta.note = "fuse";
    fused.policy.meta.iteration = 0;
    if (!artifacts.directory.empty()) {
      fused.checkpoint = artifacts.directory / (fused.id + ".ckpt");
      save_checkpoint(fused.checkpoint, fused.policy);
    }
    covered.insert(covered.end(), groups[k].games.begin(), groups[k].games.end());
    fused.games = covered;
    const PolicyParams start = fused.policy;
    result.phases.push_back(std::move(fused));

    const std::string id = config.run_id + ".c" + std::to_string(k + 1);
    result.phases.push_back(run_conquer_phase(registry, covered, start, config, id, "conquer",
                                              "conquer:" + std::to_string(k + 1), config.iterations,
                                              artifacts));
    current = result.phases.back().policy;
  }
  result.final_policy = current;
  return result;
}

std::string manifest_json(const DfcResult& result, const RunConfig& config) {
  json j;
  j["schema"] = "dfc.manifest/1";
  j["run_id"] = config.run_id;
  j["config_hash"] = config_hash(config);
  j["config"] = to_text(config);
  j["probes"] = result.probes;
  j["plan"] = {{"groups", plan_json(result.plan)}};
  json phases = json::array();
  for (const auto& p : result.phases) {
    phases.push_back({{"id", p.id},
                      {"kind", p.kind},
                      {"games", p.games},
                      {"checkpoint", p.checkpoint.string()},
                      {"lineage", p.policy.meta.lineage},
                      {"lineage_tree", lineage_tree(p.policy.meta.lineage)},
                      {"iterations", p.metrics.size()},
                      {"baseline_avg_wr", p.baseline_avg_wr},
                      {"best_avg_wr", p.metrics.empty() ? p.baseline_avg_wr : p.metrics.back().best_avg_wr}});
  }
  j["phases"] = phases;
  j["final_lineage"] = result.final_policy.meta.lineage;
  j["final_lineage_tree"] = lineage_tree(result.final_policy.meta.lineage);
  return j.dump(2);
}

std::string lineage_tree(const std::vector<std::string>& lineage) {
  std::vector<std::string> stack;
  for (const auto& entry : lineage) {
    if (entry.rfind("init:", 0) == 0) {
      stack.push_back(entry);
    } else if (entry.rfind("conquer:", 0) == 0) {
      if (stack.empty()) throw OrchestratorError("lineage: '" + entry + "' has no input policy");
      stack.back() = entry + "(" + stack.back() + ")";
    } else if (entry == "fuse") {
      if (stack.size() < 2) throw OrchestratorError("lineage: 'fuse' needs two input policies");
      std::string b = std::move(stack.back());
      stack.pop_back();
      stack.back() = "fuse(" + stack.back() + "," + b + ")";
    } else {
      throw OrchestratorError("lineage: unknown entry '" + entry + "'");
    }
  }
  if (stack.size() != 1) {
    throw OrchestratorError("lineage does not describe a single tree (" + std::to_string(stack.size()) +
                            " roots)");
  }
  return stack.front();
}

}  // namespace dfc
