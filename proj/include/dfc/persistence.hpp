#pragma once

// On-disk formats: policy checkpoints, per-iteration metrics (JSON lines),
// the per-iteration CSV report and episode replays (JSON lines).

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dfc/games.hpp"
#include "dfc/policy.hpp"
#include "dfc/trainer.hpp"

namespace dfc {

class PersistenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kCheckpointVersion = 1;
inline constexpr std::string_view kMetricsSchema = "dfc.metrics/1";
inline constexpr std::string_view kReplaySchema = "dfc.replay/1";

// Header line "format_version=1 D=<n> lineage=<a,b,...> iteration=<t>\n"
// followed by D little-endian IEEE-754 doubles.
void write_checkpoint(std::ostream& out, const PolicyParams& params);
void save_checkpoint(const std::filesystem::path& path, const PolicyParams& params);
// expected_dim, when given, must match the stored D.
PolicyParams read_checkpoint(std::istream& in, std::optional<int> expected_dim = std::nullopt);
PolicyParams load_checkpoint(const std::filesystem::path& path,
                             std::optional<int> expected_dim = std::nullopt);

// One metrics record: an IterationMetrics tagged with its run and phase.
struct MetricsRecord {
  std::string run_id;
  std::string phase;
  IterationMetrics metrics;
};

std::string to_json_line(const MetricsRecord& record);
MetricsRecord parse_metrics_line(std::string_view line);
std::vector<MetricsRecord> read_metrics(const std::filesystem::path& path);

// Appends records to a JSON-lines file, flushing after every record.
class MetricsWriter {
 public:
  explicit MetricsWriter(const std::filesystem::path& path, bool append = false);
  ~MetricsWriter();
  MetricsWriter(const MetricsWriter&) = delete;
  MetricsWriter& operator=(const MetricsWriter&) = delete;

  void write(const MetricsRecord& record);

 private:
  struct Impl;
  Impl* impl_;
};

// CSV with one row per record. Fixed columns come first, then per-game
// columns wrc:<game>, gf:<game>, gate_wr:<game>, seeds:<game> for every game
// seen in any record (sorted); cells for games absent from a row are empty.
std::string metrics_csv(const std::vector<MetricsRecord>& records);

// Replays: one JSON object per emitted action
// {"schema","game_id","seed","player","raw_action","outcome"}, where outcome
// is the mover's outcome after the action.
struct ReplayStep {
  std::string game_id;
  std::uint64_t seed = 0;
  int player = 0;
  std::string raw_action;
  StepOutcome outcome = StepOutcome::Ongoing;
};

std::vector<ReplayStep> replay_steps(const Trajectory& trajectory);
std::string to_json_line(const ReplayStep& step);
ReplayStep parse_replay_line(std::string_view line);
std::vector<ReplayStep> read_replay(const std::filesystem::path& path);
void write_replay(const std::filesystem::path& path, const std::vector<Trajectory>& trajectories);

// Re-executes every recorded episode from its seed and checks that each
// action leads to the recorded outcome. Returns an empty string when the
// replay is consistent, otherwise a description of the first mismatch.
std::string verify_replay(const GameRegistry& registry, const std::vector<ReplayStep>& steps);

}  // namespace dfc
