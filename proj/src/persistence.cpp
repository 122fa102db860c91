#include "dfc/persistence.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace dfc {

using nlohmann::json;

namespace {

[[noreturn]] void header_error(std::string_view field, std::string_view why) {
  throw PersistenceError("checkpoint header field '" + std::string(field) + "': " + std::string(why));
}

std::optional<long long> parse_ll(std::string_view s) {
  long long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

StepOutcome outcome_from(std::string_view s) {
  if (s == "Ongoing") return StepOutcome::Ongoing;
  if (s == "Win") return StepOutcome::Win;
  if (s == "Draw") return StepOutcome::Draw;
  if (s == "Lose") return StepOutcome::Lose;
  throw PersistenceError("unknown outcome '" + std::string(s) + "'");
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, mode);
  if (!out) throw PersistenceError("cannot open for writing: " + path.string());
  return out;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PersistenceError("cannot open: " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

template <typename T>
json map_json(const std::map<std::string, T>& m) {
  json j = json::object();
  for (const auto& [k, v] : m) j[k] = v;
  return j;
}

}  // namespace

void write_checkpoint(std::ostream& out, const PolicyParams& params) {
  for (const auto& entry : params.meta.lineage) {
    if (entry.find_first_of(", \t\n") != std::string::npos) {
      throw PersistenceError("lineage entry '" + entry + "' contains a separator character");
    }
  }
  std::string lineage;
  for (std::size_t i = 0; i < params.meta.lineage.size(); ++i) {
    if (i) lineage += ',';
    lineage += params.meta.lineage[i];
  }
  out << "format_version=" << kCheckpointVersion << " D=" << params.dim() << " lineage=" << lineage
      << " iteration=" << params.meta.iteration << '\n';
  for (double x : params.theta) {
    auto bits = std::bit_cast<std::uint64_t>(x);
    char bytes[8];
    for (char& b : bytes) {
      b = static_cast<char>(bits & 0xffu);
      bits >>= 8;
    }
    out.write(bytes, 8);
  }
  if (!out) throw PersistenceError("failed writing checkpoint");
}

void save_checkpoint(const std::filesystem::path& path, const PolicyParams& params) {
  auto out = open_out(path, std::ios::binary | std::ios::trunc);
  write_checkpoint(out, params);
}

PolicyParams read_checkpoint(std::istream& in, std::optional<int> expected_dim) {
  std::string header;
  if (!std::getline(in, header)) throw PersistenceError("checkpoint is empty");
  std::map<std::string, std::string> fields;
  for (const auto& item : split(header, ' ')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) header_error(item, "expected key=value");
    const std::string key = item.substr(0, eq);
    if (key != "format_version" && key != "D" && key != "lineage" && key != "iteration") {
      header_error(key, "unknown field");
    }
    if (!fields.emplace(key, item.substr(eq + 1)).second) header_error(key, "duplicated");
  }
  for (const char* required : {"format_version", "D", "lineage", "iteration"}) {
    if (!fields.count(required)) header_error(required, "missing");
  }
  const auto version = parse_ll(fields["format_version"]);
  if (!version) header_error("format_version", "not an integer");
  if (*version != kCheckpointVersion) {
    header_error("format_version", "unsupported version " + fields["format_version"] +
                                       " (expected " + std::to_string(kCheckpointVersion) + ")");
  }
  const auto dim = parse_ll(fields["D"]);
  if (!dim || *dim < 1 || *dim > (1 << 24)) header_error("D", "not a positive integer");
  if (expected_dim && *dim != *expected_dim) {
    header_error("D", "checkpoint has D=" + std::to_string(*dim) + " but the configuration expects D=" +
                          std::to_string(*expected_dim));
  }
  const auto iteration = parse_ll(fields["iteration"]);
  if (!iteration || *iteration < 0) header_error("iteration", "not a non-negative integer");

  PolicyParams p;
  p.meta.feature_dim = static_cast<int>(*dim);
  p.meta.lineage = split(fields["lineage"], ',');
  p.meta.iteration = static_cast<int>(*iteration);
  p.theta.resize(static_cast<std::size_t>(*dim));
  for (std::size_t i = 0; i < p.theta.size(); ++i) {
    unsigned char bytes[8];
    if (!in.read(reinterpret_cast<char*>(bytes), 8)) {
      throw PersistenceError("checkpoint truncated: expected " + std::to_string(*dim) +
                             " values, found " + std::to_string(i));
    }
    std::uint64_t bits = 0;
    for (int b = 7; b >= 0; --b) bits = (bits << 8) | bytes[b];
    p.theta[i] = std::bit_cast<double>(bits);
    if (!std::isfinite(p.theta[i])) {
      throw PersistenceError("checkpoint value " + std::to_string(i) + " is not finite");
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw PersistenceError("checkpoint has trailing bytes after " + std::to_string(*dim) + " values");
  }
  return p;
}

PolicyParams load_checkpoint(const std::filesystem::path& path, std::optional<int> expected_dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PersistenceError("cannot open checkpoint: " + path.string());
  try {
    PolicyParams p = read_checkpoint(in, expected_dim);
    p.meta.note = path.filename().string();
    return p;
  } catch (const PersistenceError& e) {
    throw PersistenceError(path.string() + ": " + e.what());
  }
}

std::string to_json_line(const MetricsRecord& r) {
  const IterationMetrics& m = r.metrics;
  json j;
  j["schema"] = kMetricsSchema;
  j["run_id"] = r.run_id;
  j["phase"] = r.phase;
  j["iteration"] = m.iteration;
  j["wrc"] = map_json(m.wrc);
  j["gf"] = map_json(m.gf);
  j["gate_wr"] = map_json(m.gate_wr);
  j["seeds"] = map_json(m.seeds);
  j["mean_steps"] = m.mean_steps;
  j["mean_reward"] = m.mean_reward;
  j["loss"] = m.loss;
  j["kl"] = m.kl;
  j["epsilon"] = m.epsilon;
  j["trajectories"] = m.trajectories;
  j["kept"] = m.kept;
  j["format_penalized"] = m.format_penalized;
  j["groups_used"] = m.groups_used;
  j["candidate_avg_wr"] = m.candidate_avg_wr;
  j["best_avg_wr"] = m.best_avg_wr;
  j["accepted"] = m.accepted;
  j["wall_clock_s"] = m.wall_clock_s;
  return j.dump();
}

MetricsRecord parse_metrics_line(std::string_view line) {
  try {
    const json j = json::parse(line);
    if (j.at("schema").get<std::string>() != kMetricsSchema) {
      throw PersistenceError("unsupported metrics schema '" + j.at("schema").get<std::string>() + "'");
    }
    MetricsRecord r;
    r.run_id = j.at("run_id").get<std::string>();
    r.phase = j.at("phase").get<std::string>();
    IterationMetrics& m = r.metrics;
    m.iteration = j.at("iteration").get<int>();
    m.wrc = j.at("wrc").get<std::map<std::string, double>>();
    m.gf = j.at("gf").get<std::map<std::string, double>>();
    m.gate_wr = j.at("gate_wr").get<std::map<std::string, double>>();
    m.seeds = j.at("seeds").get<std::map<std::string, int>>();
    m.mean_steps = j.at("mean_steps").get<double>();
    m.mean_reward = j.at("mean_reward").get<double>();
    m.loss = j.at("loss").get<double>();
    m.kl = j.at("kl").get<double>();
    m.epsilon = j.at("epsilon").get<double>();
    m.trajectories = j.at("trajectories").get<int>();
    m.kept = j.at("kept").get<int>();
    m.format_penalized = j.at("format_penalized").get<int>();
    m.groups_used = j.at("groups_used").get<int>();
    m.candidate_avg_wr = j.at("candidate_avg_wr").get<double>();
    m.best_avg_wr = j.at("best_avg_wr").get<double>();
    m.accepted = j.at("accepted").get<bool>();
    m.wall_clock_s = j.at("wall_clock_s").get<double>();
    return r;
  } catch (const json::exception& e) {
    throw PersistenceError(std::string("malformed metrics record: ") + e.what());
  }
}

std::vector<MetricsRecord> read_metrics(const std::filesystem::path& path) {
  std::vector<MetricsRecord> out;
  std::size_t n = 0;
  for (const auto& line : read_lines(path)) {
    ++n;
    try {
      out.push_back(parse_metrics_line(line));
    } catch (const PersistenceError& e) {
      throw PersistenceError(path.string() + " record " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

struct MetricsWriter::Impl {
  std::ofstream out;
};

MetricsWriter::MetricsWriter(const std::filesystem::path& path, bool append)
    : impl_(new Impl{open_out(path, append ? std::ios::app : std::ios::trunc)}) {}

MetricsWriter::~MetricsWriter() { delete impl_; }

void MetricsWriter::write(const MetricsRecord& record) {
  impl_->out << to_json_line(record) << '\n';
  impl_->out.flush();
  if (!impl_->out) throw PersistenceError("failed writing metrics record");
}

std::string metrics_csv(const std::vector<MetricsRecord>& records) {
  std::set<std::string> games;
  for (const auto& r : records) {
    for (const auto& [g, v] : r.metrics.wrc) games.insert(g);
    for (const auto& [g, v] : r.metrics.seeds) games.insert(g);
  }
  auto num = [](double x) {
    std::ostringstream o;
    o.precision(10);
    o << x;
    return o.str();
  };
  std::ostringstream o;
  o << "run_id,phase,iteration,mean_steps,mean_reward,loss,kl,epsilon,trajectories,kept,"
       "format_penalized,groups_used,candidate_avg_wr,best_avg_wr,accepted,wall_clock_s";
  for (const char* prefix : {"wrc", "gf", "gate_wr", "seeds"}) {
    for (const auto& g : games) o << ',' << prefix << ':' << g;
  }
  o << '\n';
  for (const auto& r : records) {
    const auto& m = r.metrics;
    o << r.run_id << ',' << r.phase << ',' << m.iteration << ',' << num(m.mean_steps) << ','
      << num(m.mean_reward) << ',' << num(m.loss) << ',' << num(m.kl) << ',' << num(m.epsilon) << ','
      << m.trajectories << ',' << m.kept << ',' << m.format_penalized << ',' << m.groups_used << ','
      << num(m.candidate_avg_wr) << ',' << num(m.best_avg_wr) << ',' << (m.accepted ? 1 : 0) << ','
      << num(m.wall_clock_s);
    for (const auto* table : {&m.wrc, &m.gf, &m.gate_wr}) {
      for (const auto& g : games) {
        o << ',';
        if (auto it = table->find(g); it != table->end()) o << num(it->second);
      }
    }
    for (const auto& g : games) {
      o << ',';
      if (auto it = m.seeds.find(g); it != m.seeds.end()) o << it->second;
    }
    o << '\n';
  }
  return o.str();
}

std::vector<ReplayStep> replay_steps(const Trajectory& t) {
  std::vector<ReplayStep> out;
  out.reserve(t.steps.size());
  for (const auto& s : t.steps) out.push_back({t.game_id, t.seed, s.player, s.raw, s.outcome});
  return out;
}

std::string to_json_line(const ReplayStep& s) {
  json j;
  j["schema"] = kReplaySchema;
  j["game_id"] = s.game_id;
  j["seed"] = s.seed;
  j["player"] = s.player;
  j["raw_action"] = s.raw_action;
  j["outcome"] = to_string(s.outcome);
  return j.dump();
}

ReplayStep parse_replay_line(std::string_view line) {
  try {
    const json j = json::parse(line);
    if (j.at("schema").get<std::string>() != kReplaySchema) {
      throw PersistenceError("unsupported replay schema '" + j.at("schema").get<std::string>() + "'");
    }
    return ReplayStep{j.at("game_id").get<std::string>(), j.at("seed").get<std::uint64_t>(),
                      j.at("player").get<int>(), j.at("raw_action").get<std::string>(),
                      outcome_from(j.at("outcome").get<std::string>())};
  } catch (const json::exception& e) {
    throw PersistenceError(std::string("malformed replay record: ") + e.what());
  }
}

std::vector<ReplayStep> read_replay(const std::filesystem::path& path) {
  std::vector<ReplayStep> out;
  for (const auto& line : read_lines(path)) out.push_back(parse_replay_line(line));
  return out;
}

void write_replay(const std::filesystem::path& path, const std::vector<Trajectory>& trajectories) {
  auto out = open_out(path, std::ios::trunc);
  for (const auto& t : trajectories) {
    for (const auto& s : replay_steps(t)) out << to_json_line(s) << '\n';
  }
  if (!out) throw PersistenceError("failed writing replay " + path.string());
}

std::string verify_replay(const GameRegistry& registry, const std::vector<ReplayStep>& steps) {
  std::optional<GameState> state;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const ReplayStep& s = steps[i];
    const std::string where = "action " + std::to_string(i + 1) + " (" + s.game_id + ", seed " +
                              std::to_string(s.seed) + ")";
    if (!state) {
      if (!registry.contains(s.game_id)) return where + ": unknown game";
      state = reset(registry, s.game_id, s.seed);
    } else if (state->game_id() != s.game_id) {
      return where + ": game changed before the episode ended";
    }
    if (state->current_player != s.player) {
      return where + ": recorded player " + std::to_string(s.player) + " but player " +
             std::to_string(state->current_player) + " is to move";
    }
    const ActionToken token = parse_action(*state, s.raw_action);
    StepResult r = token.format_error() ? forfeit(*state) : step(*state, token);
    if (r.outcome != s.outcome) {
      return where + ": recorded outcome " + std::string(to_string(s.outcome)) + " but replay gives " +
             std::string(to_string(r.outcome));
    }
    if (r.state.terminal) state.reset();
    else state = std::move(r.state);
  }
  if (state) return "replay ends in the middle of an episode";
  return {};
}

}  // namespace dfc
