#pragma once

// Divide, fuse, conquer: probe the untrained policy, split the roster into
// groups, train a specialist per group, then fold the specialists in one at
// a time by parameter averaging followed by training on the cumulative union.

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dfc/config.hpp"
#include "dfc/games.hpp"
#include "dfc/persistence.hpp"
#include "dfc/policy.hpp"
#include "dfc/trainer.hpp"

namespace dfc {

class OrchestratorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Win fraction of `policy` (sampling, epsilon 0) over `trials` episodes with
// fresh seeds. Two-player games face a uniform-random opponent and alternate
// seats between trials.
double probe_baseline(const PolicyParams& policy, const Featurizer& featurizer,
                      const GameRegistry& registry, const std::string& game_id, int trials,
                      std::uint64_t seed_base, bool distractors);

using ProbeTable = std::map<std::string, double>;

ProbeTable probe_all(const PolicyParams& policy, const Featurizer& featurizer,
                     const GameRegistry& registry, const std::vector<std::string>& games,
                     int trials, std::uint64_t seed_base, bool distractors);

struct PlanGroup {
  std::string name;  // "winnable-fixed", "unwinnable-random", ...
  InitMode init_mode = InitMode::FixedInit;
  bool winnable = false;
  std::vector<std::string> games;
};

struct GroupPlan {
  std::vector<PlanGroup> groups;

  std::vector<std::string> all_games() const;
};

std::string divide_cell_name(InitMode mode, bool winnable);

// 2x2 split by (init mode, probe > 0). Empty cells are dropped; groups follow
// `order` (cell names); games keep their roster order inside a group.
GroupPlan divide(const GameRegistry& registry, const std::vector<std::string>& games,
                 const ProbeTable& probes, const std::vector<std::string>& order);

std::string plan_to_json(const GroupPlan& plan, const ProbeTable& probes, int indent = 2);
GroupPlan plan_from_json(std::string_view text);

// Where a phase writes its artifacts. An empty directory disables files.
struct ArtifactOptions {
  std::filesystem::path directory;
  bool checkpoint_every_iteration = true;
  MetricsWriter* metrics = nullptr;
  std::function<void(const std::string& phase, const IterationMetrics&)> on_iteration;
};

struct PhaseResult {
  std::string id;
  std::string kind;  // "specialist", "fuse" or "conquer"
  std::vector<std::string> games;
  PolicyParams policy;
  std::filesystem::path checkpoint;  // empty when files are disabled
  std::vector<IterationMetrics> metrics;
  double baseline_avg_wr = 0.0;
};

// One conquer phase with checkpoints {phase_id}_{t}.ckpt for every
// candidate, {phase_id}_best.ckpt whenever the best policy changes and
// {phase_id}_final.ckpt for the returned policy.
PhaseResult run_conquer_phase(const GameRegistry& registry, const std::vector<std::string>& games,
                              const PolicyParams& init, const RunConfig& config,
                              const std::string& phase_id, const std::string& kind,
                              const std::string& stream, int iterations,
                              const ArtifactOptions& artifacts);

struct DfcResult {
  GroupPlan plan;
  ProbeTable probes;
  PolicyParams initial;
  std::vector<PolicyParams> specialists;  // one per group, plan order
  std::vector<PhaseResult> phases;        // execution order
  PolicyParams final_policy;
};

// Probes and divides when `plan` is not given.
DfcResult dfc_run(const GameRegistry& registry, const RunConfig& config,
                  const std::optional<GroupPlan>& plan, const ArtifactOptions& artifacts);

// Manifest JSON: config hash and text, plan, probes and every phase with its
// checkpoint, games and lineage.
std::string manifest_json(const DfcResult& result, const RunConfig& config);

// Rebuilds the fusion tree from a postfix lineage, e.g.
// ["init:0","conquer:a","init:0","conquer:b","fuse","conquer:c"] gives
// "conquer:c(fuse(conquer:a(init:0),conquer:b(init:0)))".
std::string lineage_tree(const std::vector<std::string>& lineage);

}  // namespace dfc
