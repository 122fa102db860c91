#include "dfc/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "dfc/harness.hpp"
#include "dfc/orchestrator.hpp"
#include "dfc/persistence.hpp"
#include "json.hpp"

namespace dfc {

namespace {

using nlohmann::json;

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::string run_id;
  std::string out_dir;
};

void add_common(CLI::App* sub, CommonOptions& o) {
  sub->add_option("--config,-c", o.config_path, "Run configuration file (key = value lines)")
      ->check(CLI::ExistingFile);
  sub->add_option("--set", o.overrides, "Override one configuration key, e.g. --set T=50")
      ->type_name("KEY=VALUE");
  sub->add_option("--seed", o.seed, "Master seed (overrides the file and DFC_ARENA_SEED)");
  sub->add_option("--run-id", o.run_id, "Run identifier used in artifact names");
  sub->add_option("--out-dir,-d", o.out_dir, "Directory for checkpoints, metrics and manifests");
}

RunConfig build_config(const CommonOptions& o) {
  RunConfig cfg = o.config_path.empty() ? RunConfig{} : load_config(o.config_path);
  apply_environment(cfg);
  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects KEY=VALUE, got '" + kv + "'");
    set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.seed) cfg.master_seed = *o.seed;
  if (!o.run_id.empty()) cfg.run_id = o.run_id;
  cfg.validate();
  return cfg;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::filesystem::path metrics_path(const std::string& dir, const RunConfig& cfg) {
  return std::filesystem::path(dir) / (cfg.run_id + ".metrics.jsonl");
}

void print_phase_summary(std::ostream& out, const PhaseResult& p) {
  out << p.id << " (" << p.kind << "): games=";
  for (std::size_t i = 0; i < p.games.size(); ++i) out << (i ? "," : "") << p.games[i];
  if (!p.metrics.empty()) {
    const auto& last = p.metrics.back();
    out << " iterations=" << p.metrics.size() << " baseline_avg_wr=" << p.baseline_avg_wr
        << " best_avg_wr=" << last.best_avg_wr;
  }
  if (!p.checkpoint.empty()) out << " checkpoint=" << p.checkpoint.string();
  out << '\n';
}

json report_json(const MatchReport& report) {
  json rows = json::array();
  auto wdl = [](const Wdl& w) { return json{{"wins", w.wins}, {"draws", w.draws}, {"losses", w.losses}}; };
  for (const auto& r : report.rows) {
    rows.push_back({{"game_id", r.game_id},
                    {"opponent", r.opponent},
                    {"players", r.players},
                    {"first", wdl(r.by_role[0])},
                    {"second", wdl(r.by_role[1])},
                    {"combined", wdl(r.combined)}});
  }
  return {{"schema", "dfc.eval/1"}, {"rows", rows}, {"mean_win_rate", report.mean_win_rate()}};
}

MatchReport report_from_json(const std::string& text) {
  const json j = json::parse(text);
  MatchReport report;
  auto wdl = [](const json& w) {
    return Wdl{w.at("wins").get<int>(), w.at("draws").get<int>(), w.at("losses").get<int>()};
  };
  for (const auto& r : j.at("rows")) {
    MatchRow row;
    row.game_id = r.at("game_id").get<std::string>();
    row.opponent = r.at("opponent").get<std::string>();
    row.players = r.at("players").get<int>();
    row.by_role = {wdl(r.at("first")), wdl(r.at("second"))};
    row.combined = wdl(r.at("combined"));
    report.rows.push_back(std::move(row));
  }
  return report;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void set_toggle(RunConfig& cfg, const std::string& toggle, bool on) {
  if (toggle == "hap") cfg.reward_mode = on ? RewardMode::StepShaped : RewardMode::EnvOnly;
  else set_config_value(cfg, toggle, on ? "on" : "off");
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Divide-fuse-conquer training of softmax game policies with GRPO self-play", "dfc"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  CommonOptions common;

  // probe
  int probe_trials = 0;
  std::string probe_out;
  auto* probe = app.add_subcommand("probe", "Probe the untrained policy and print the group plan");
  add_common(probe, common);
  probe->add_option("--trials", probe_trials, "Episodes per game (default: probe_trials)")
      ->check(CLI::PositiveNumber);
  probe->add_option("-o,--output", probe_out, "Write the plan JSON here instead of stdout");

  // train-group
  std::string tg_plan, tg_group, tg_init;
  auto* train_group = app.add_subcommand("train-group", "Train a specialist on one group");
  add_common(train_group, common);
  train_group->add_option("--plan", tg_plan, "Group plan JSON from `probe`")->check(CLI::ExistingFile);
  train_group->add_option("--group", tg_group, "Group name in the plan (default: the games key)");
  train_group->add_option("--init", tg_init, "Start from this checkpoint")->check(CLI::ExistingFile);

  // fuse
  std::string fuse_a, fuse_b, fuse_out;
  auto* fuse_cmd = app.add_subcommand("fuse", "Average two checkpoints");
  fuse_cmd->add_option("a", fuse_a, "First checkpoint")->required()->check(CLI::ExistingFile);
  fuse_cmd->add_option("b", fuse_b, "Second checkpoint")->required()->check(CLI::ExistingFile);
  fuse_cmd->add_option("-o,--output", fuse_out, "Output checkpoint")->required();

  // conquer
  std::string cq_init;
  auto* conquer_cmd = app.add_subcommand("conquer", "Run the conquer loop on the configured games");
  add_common(conquer_cmd, common);
  conquer_cmd->add_option("--init", cq_init, "Start from this checkpoint")->check(CLI::ExistingFile);

  // dfc-run
  std::string dfc_plan;
  auto* dfc_cmd = app.add_subcommand("dfc-run", "Probe, divide, train specialists, fuse and conquer");
  add_common(dfc_cmd, common);
  dfc_cmd->add_option("--plan", dfc_plan, "Use this group plan instead of probing")
      ->check(CLI::ExistingFile);

  // eval
  std::string ev_ckpt, ev_opponent = "random", ev_initial, ev_replay, ev_json;
  int ev_seeds = 0;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint against a scripted opponent");
  add_common(eval_cmd, common);
  eval_cmd->add_option("checkpoint", ev_ckpt, "Policy checkpoint")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--opponent", ev_opponent, "random, greedy, minimax[:depth] or initial");
  eval_cmd->add_option("--initial", ev_initial,
                       "Checkpoint for the initial opponent (default: fresh init from the master seed)")
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--seeds", ev_seeds, "Seeds per game and seat (default: eval_seeds)")
      ->check(CLI::PositiveNumber);
  eval_cmd->add_option("--replay", ev_replay, "Write every evaluation episode as a JSON-lines replay");
  eval_cmd->add_option("--json", ev_json, "Write the W/D/L report as JSON");

  // report
  std::vector<std::string> rp_metrics, rp_eval;
  std::string rp_out;
  auto* report_cmd = app.add_subcommand("report", "Render metrics logs as CSV and W/D/L tables");
  report_cmd->add_option("metrics", rp_metrics, "Metrics JSON-lines files")->check(CLI::ExistingFile);
  report_cmd->add_option("--eval", rp_eval, "Evaluation JSON files from `eval --json`")
      ->check(CLI::ExistingFile);
  report_cmd->add_option("-o,--output", rp_out, "Write the CSV here instead of stdout");

  // ablate
  std::string ab_toggle;
  int ab_runs = 3;
  auto* ablate_cmd = app.add_subcommand("ablate", "Paired runs with one toggle on and off");
  add_common(ablate_cmd, common);
  ablate_cmd->add_option("--toggle", ab_toggle, "Toggle to flip")
      ->required()
      ->check(CLI::IsMember({"fr", "mps", "hn", "eg", "rs", "hap"}));
  ablate_cmd->add_option("--runs", ab_runs, "Master seeds per arm (seed, seed+1, ...)")
      ->check(CLI::PositiveNumber);

  // verify-replay
  std::string vr_file;
  auto* verify_cmd = app.add_subcommand("verify-replay", "Re-execute a replay file and check it");
  add_common(verify_cmd, common);
  verify_cmd->add_option("replay", vr_file, "Replay JSON-lines file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*fuse_cmd) {
      const PolicyParams a = load_checkpoint(fuse_a);
      const PolicyParams b = load_checkpoint(fuse_b, a.dim());
      PolicyParams c = fuse(a, b);
      c.meta.iteration = 0;
      save_checkpoint(fuse_out, c);
      out << "wrote " << fuse_out << " (D=" << c.dim() << ", lineage " << c.meta.lineage.size()
          << " entries)\n";
      return 0;
    }

    if (*report_cmd) {
      if (rp_metrics.empty() && rp_eval.empty()) {
        throw std::runtime_error("report: give at least one metrics file or --eval file");
      }
      if (!rp_metrics.empty()) {
        std::vector<MetricsRecord> records;
        for (const auto& f : rp_metrics) {
          auto r = read_metrics(f);
          records.insert(records.end(), r.begin(), r.end());
        }
        const std::string csv = metrics_csv(records);
        if (rp_out.empty()) out << csv;
        else write_file(rp_out, csv);
      }
      for (const auto& f : rp_eval) out << format_report(report_from_json(read_file(f)));
      return 0;
    }

    const RunConfig cfg = build_config(common);
    const GameRegistry registry = register_builtin_games(cfg.max_steps);
    const Featurizer featurizer(cfg.feature_dim, cfg.feature_seed);
    for (const auto& g : cfg.games) registry.find(g);

    auto artifacts_for = [&](std::unique_ptr<MetricsWriter>& writer) {
      ArtifactOptions a;
      if (!common.out_dir.empty()) {
        a.directory = common.out_dir;
        writer = std::make_unique<MetricsWriter>(metrics_path(common.out_dir, cfg));
        a.metrics = writer.get();
      }
      return a;
    };

    if (*probe) {
      const PolicyParams init = init_params(cfg.feature_dim, cfg.master_seed);
      const int trials = probe_trials > 0 ? probe_trials : cfg.probe_trials;
      const ProbeTable probes =
          probe_all(init, featurizer, registry, cfg.games, trials,
                    mix_seed(cfg.master_seed, hash_string("probe")), cfg.distractors);
      const GroupPlan plan = divide(registry, cfg.games, probes, cfg.group_order);
      const std::string text = plan_to_json(plan, probes) + "\n";
      if (probe_out.empty()) out << text;
      else write_file(probe_out, text);
      return 0;
    }

    if (*train_group || *conquer_cmd) {
      std::vector<std::string> games = cfg.games;
      if (*train_group && !tg_plan.empty()) {
        const GroupPlan plan = plan_from_json(read_file(tg_plan));
        if (tg_group.empty()) throw std::runtime_error("train-group: --plan needs --group");
        const auto it = std::find_if(plan.groups.begin(), plan.groups.end(),
                                     [&](const PlanGroup& g) { return g.name == tg_group; });
        if (it == plan.groups.end()) throw std::runtime_error("train-group: no group named " + tg_group);
        games = it->games;
      }
      const std::string& init_path = *train_group ? tg_init : cq_init;
      const PolicyParams init = init_path.empty() ? init_params(cfg.feature_dim, cfg.master_seed)
                                                  : load_checkpoint(init_path, cfg.feature_dim);
      std::unique_ptr<MetricsWriter> writer;
      const ArtifactOptions artifacts = artifacts_for(writer);
      const bool specialist = static_cast<bool>(*train_group);
      const PhaseResult result = run_conquer_phase(
          registry, games, init, cfg, cfg.run_id, specialist ? "specialist" : "conquer",
          specialist ? "specialist" : "conquer", specialist ? cfg.specialist_T() : cfg.iterations,
          artifacts);
      print_phase_summary(out, result);
      return 0;
    }

    if (*dfc_cmd) {
      std::optional<GroupPlan> plan;
      if (!dfc_plan.empty()) plan = plan_from_json(read_file(dfc_plan));
      std::unique_ptr<MetricsWriter> writer;
      const ArtifactOptions artifacts = artifacts_for(writer);
      const DfcResult result = dfc_run(registry, cfg, plan, artifacts);
      for (const auto& p : result.phases) print_phase_summary(out, p);
      out << "lineage: " << lineage_tree(result.final_policy.meta.lineage) << '\n';
      if (!common.out_dir.empty()) {
        const auto dir = std::filesystem::path(common.out_dir);
        save_checkpoint(dir / (cfg.run_id + ".final.ckpt"), result.final_policy);
        write_file(dir / (cfg.run_id + ".manifest.json"), manifest_json(result, cfg) + "\n");
        out << "manifest: " << (dir / (cfg.run_id + ".manifest.json")).string() << '\n';
      }
      return 0;
    }

    if (*eval_cmd) {
      const PolicyParams policy = load_checkpoint(ev_ckpt, cfg.feature_dim);
      OpponentSpec opponent;
      if (grammar::iequals(ev_opponent, "initial")) {
        auto init = std::make_shared<PolicyParams>(
            ev_initial.empty() ? init_params(cfg.feature_dim, cfg.master_seed)
                               : load_checkpoint(ev_initial, cfg.feature_dim));
        opponent = initial_opponent(std::move(init), ev_initial.empty() ? "init" : ev_initial);
      } else {
        opponent = parse_opponent(ev_opponent);
      }
      std::vector<Trajectory> episodes;
      EvalOptions opts;
      opts.n_seeds = ev_seeds > 0 ? ev_seeds : cfg.eval_seeds;
      opts.seed_base = mix_seed(cfg.master_seed, hash_string("eval"));
      opts.distractors = cfg.distractors;
      if (!ev_replay.empty()) opts.record = &episodes;
      const MatchReport report = evaluate_all(policy, featurizer, registry, cfg.games, opponent, opts);
      out << format_report(report);
      if (!ev_replay.empty()) write_replay(ev_replay, episodes);
      if (!ev_json.empty()) write_file(ev_json, report_json(report).dump(2) + "\n");
      return 0;
    }

    if (*ablate_cmd) {
      out << "toggle,arm,seed,game,final_gf,final_wrc,mean_steps,best_avg_wr,eval_win_rate\n";
      std::map<std::string, std::vector<double>> gf_min, eval_wr;
      for (int arm = 1; arm >= 0; --arm) {
        for (int run = 0; run < ab_runs; ++run) {
          RunConfig c = cfg;
          set_toggle(c, ab_toggle, arm == 1);
          c.master_seed = cfg.master_seed + static_cast<std::uint64_t>(run);
          c.run_id = cfg.run_id + "." + ab_toggle + (arm ? "-on." : "-off.") + std::to_string(run);
          std::unique_ptr<MetricsWriter> writer;
          ArtifactOptions artifacts;
          if (!common.out_dir.empty()) {
            writer = std::make_unique<MetricsWriter>(metrics_path(common.out_dir, c));
            artifacts.metrics = writer.get();
          }
          const PolicyParams init = init_params(c.feature_dim, c.master_seed);
          const PhaseResult r = run_conquer_phase(registry, c.games, init, c, c.run_id, "conquer",
                                                  "ablate", c.iterations, artifacts);
          const auto& last = r.metrics.back();
          EvalOptions eo{c.eval_seeds, mix_seed(c.master_seed, hash_string("eval")), c.distractors};
          const MatchReport rep = evaluate_all(r.policy, featurizer, registry, c.games,
                                               parse_opponent("random"), eo);
          double worst_gf = 1.0;
          for (const auto& row : rep.rows) {
            const double gf = last.gf.at(row.game_id);
            worst_gf = std::min(worst_gf, gf);
            out << ab_toggle << ',' << (arm ? "on" : "off") << ',' << c.master_seed << ','
                << row.game_id << ',' << gf << ',' << last.wrc.at(row.game_id) << ','
                << last.mean_steps << ',' << last.best_avg_wr << ',' << row.combined.win_rate() << '\n';
          }
          const std::string key = arm ? "on" : "off";
          gf_min[key].push_back(worst_gf);
          eval_wr[key].push_back(rep.mean_win_rate());
        }
      }
      for (const char* arm : {"on", "off"}) {
        out << "# " << ab_toggle << '=' << arm << ": median min-GF " << median(gf_min[arm])
            << ", median eval win rate vs random " << median(eval_wr[arm]) << '\n';
      }
      return 0;
    }

    if (*verify_cmd) {
      const auto steps = read_replay(vr_file);
      const std::string problem = verify_replay(registry, steps);
      if (!problem.empty()) {
        err << "error: replay mismatch: " << problem << '\n';
        return 1;
      }
      out << "replay ok: " << steps.size() << " actions reproduced\n";
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace dfc
