#include "dfc/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace dfc {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view why) {
  throw ConfigError("config key '" + std::string(key) + "': " + std::string(why) + " (got '" +
                    std::string(value) + "')");
}

long long to_int(std::string_view key, std::string_view v) {
  long long out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "expected an integer");
  return out;
}

std::uint64_t to_u64(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "expected an unsigned integer");
  return out;
}

double to_real(std::string_view key, std::string_view v) {
  const std::string s(v);
  char* end = nullptr;
  const double out = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(out)) {
    bad_value(key, v, "expected a finite real number");
  }
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
  if (v == "off" || v == "false" || v == "0" || v == "no") return false;
  bad_value(key, v, "expected on/off");
}

std::vector<std::string> to_list(std::string_view v) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= v.size()) {
    const std::size_t comma = v.find(',', start);
    const auto item = trim(v.substr(start, comma == std::string_view::npos ? v.npos : comma - start));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    out += items[i];
  }
  return out;
}

std::string fmt_real(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

const char* on_off(bool b) { return b ? "on" : "off"; }

}  // namespace

std::string_view to_string(RewardMode mode) {
  return mode == RewardMode::StepShaped ? "StepShaped" : "EnvOnly";
}

std::string_view to_string(GateMode mode) {
  return mode == GateMode::VersusInitial ? "versus_initial" : "training_rollouts";
}

void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  auto as_int = [&] { return static_cast<int>(to_int(key, value)); };
  if (key == "games") cfg.games = to_list(value);
  else if (key == "D") cfg.feature_dim = as_int();
  else if (key == "T") cfg.iterations = as_int();
  else if (key == "specialist_T") cfg.specialist_iterations = as_int();
  else if (key == "S") cfg.seeds_per_game = as_int();
  else if (key == "r") cfg.group_size = as_int();
  else if (key == "a") cfg.mps_a = to_real(key, value);
  else if (key == "b") cfg.mps_b = to_real(key, value);
  else if (key == "eps1") cfg.mps_eps1 = to_real(key, value);
  else if (key == "epsilon") cfg.epsilon = to_real(key, value);
  else if (key == "clip_eps") cfg.clip_eps = to_real(key, value);
  else if (key == "kl_alpha") cfg.kl_alpha = to_real(key, value);
  else if (key == "learning_rate") cfg.learning_rate = to_real(key, value);
  else if (key == "std_floor") cfg.std_floor = to_real(key, value);
  else if (key == "max_steps") cfg.max_steps = as_int();
  else if (key == "feature_seed") cfg.feature_seed = to_u64(key, value);
  else if (key == "master_seed") cfg.master_seed = to_u64(key, value);
  else if (key == "reward_mode") {
    if (value == "StepShaped") cfg.reward_mode = RewardMode::StepShaped;
    else if (value == "EnvOnly") cfg.reward_mode = RewardMode::EnvOnly;
    else bad_value(key, value, "expected StepShaped or EnvOnly");
  }
  else if (key == "hap") cfg.reward_mode = to_bool(key, value) ? RewardMode::StepShaped : RewardMode::EnvOnly;
  else if (key == "fr") cfg.toggles.fr = to_bool(key, value);
  else if (key == "mps") cfg.toggles.mps = to_bool(key, value);
  else if (key == "hn") cfg.toggles.hn = to_bool(key, value);
  else if (key == "eg") cfg.toggles.eg = to_bool(key, value);
  else if (key == "rs") cfg.toggles.rs = to_bool(key, value);
  else if (key == "distractors") cfg.distractors = to_bool(key, value);
  else if (key == "gate") {
    if (value == "versus_initial") cfg.gate = GateMode::VersusInitial;
    else if (value == "training_rollouts") cfg.gate = GateMode::TrainingRollouts;
    else bad_value(key, value, "expected versus_initial or training_rollouts");
  }
  else if (key == "gate_seeds") cfg.gate_seeds = as_int();
  else if (key == "probe_trials") cfg.probe_trials = as_int();
  else if (key == "eval_seeds") cfg.eval_seeds = as_int();
  else if (key == "group_order") cfg.group_order = to_list(value);
  else if (key == "run_id") cfg.run_id = std::string(value);
  else if (key == "record_wall_clock") cfg.record_wall_clock = to_bool(key, value);
  else throw ConfigError("unknown config key '" + std::string(key) + "'");
}

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  bool saw_hap = false, saw_mode = false;
  RewardMode hap_mode = RewardMode::StepShaped;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    try {
      set_config_value(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
    if (key == "hap") {
      saw_hap = true;
      hap_mode = cfg.reward_mode;
    }
    if (key == "reward_mode") saw_mode = true;
  }
  if (saw_hap && saw_mode && hap_mode != cfg.reward_mode) {
    throw ConfigError("config keys 'hap' and 'reward_mode' disagree");
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void RunConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("invalid config: " + what);
  };
  require(!games.empty(), "games must list at least one game");
  require(feature_dim >= 1, "D must be >= 1");
  require(iterations >= 1, "T must be >= 1");
  require(specialist_iterations >= 0, "specialist_T must be >= 0");
  require(seeds_per_game >= 1, "S must be >= 1");
  require(group_size >= 1, "r must be >= 1");
  require(epsilon >= 0.0 && epsilon <= 1.0, "epsilon must lie in [0, 1]");
  require(max_steps >= 1, "max_steps must be >= 1");
  require(gate_seeds >= 1, "gate_seeds must be >= 1");
  require(probe_trials >= 1, "probe_trials must be >= 1");
  require(eval_seeds >= 1, "eval_seeds must be >= 1");
  require(!run_id.empty() && run_id.find_first_of(" \t,/\\") == std::string::npos,
          "run_id must be non-empty without spaces, commas or slashes");
  try {
    mps().validate();
    grpo().validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
}

MpsConfig RunConfig::mps() const { return {mps_a, mps_b, mps_eps1, seeds_per_game}; }

GrpoConfig RunConfig::grpo() const { return {clip_eps, kl_alpha, learning_rate, std_floor}; }

std::string to_text(const RunConfig& c) {
  std::ostringstream o;
  o << "games = " << join(c.games) << '\n'
    << "D = " << c.feature_dim << '\n'
    << "T = " << c.iterations << '\n'
    << "specialist_T = " << c.specialist_iterations << '\n'
    << "S = " << c.seeds_per_game << '\n'
    << "r = " << c.group_size << '\n'
    << "a = " << fmt_real(c.mps_a) << '\n'
    << "b = " << fmt_real(c.mps_b) << '\n'
    << "eps1 = " << fmt_real(c.mps_eps1) << '\n'
    << "epsilon = " << fmt_real(c.epsilon) << '\n'
    << "clip_eps = " << fmt_real(c.clip_eps) << '\n'
    << "kl_alpha = " << fmt_real(c.kl_alpha) << '\n'
    << "learning_rate = " << fmt_real(c.learning_rate) << '\n'
    << "std_floor = " << fmt_real(c.std_floor) << '\n'
    << "max_steps = " << c.max_steps << '\n'
    << "feature_seed = " << c.feature_seed << '\n'
    << "master_seed = " << c.master_seed << '\n'
    << "reward_mode = " << to_string(c.reward_mode) << '\n'
    << "fr = " << on_off(c.toggles.fr) << '\n'
    << "mps = " << on_off(c.toggles.mps) << '\n'
    << "hn = " << on_off(c.toggles.hn) << '\n'
    << "eg = " << on_off(c.toggles.eg) << '\n'
    << "rs = " << on_off(c.toggles.rs) << '\n'
    << "distractors = " << on_off(c.distractors) << '\n'
    << "gate = " << to_string(c.gate) << '\n'
    << "gate_seeds = " << c.gate_seeds << '\n'
    << "probe_trials = " << c.probe_trials << '\n'
    << "eval_seeds = " << c.eval_seeds << '\n'
    << "group_order = " << join(c.group_order) << '\n'
    << "run_id = " << c.run_id << '\n'
    << "record_wall_clock = " << on_off(c.record_wall_clock) << '\n';
  return o.str();
}

std::string config_hash(const RunConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(hash_string(to_text(cfg))));
  return buf;
}

void apply_environment(RunConfig& cfg) {
  if (const char* s = std::getenv("DFC_ARENA_SEED"); s != nullptr && *s != '\0') {
    cfg.master_seed = to_u64("DFC_ARENA_SEED", s);
  }
}

}  // namespace dfc
