#include <cstring>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "dfc/harness.hpp"
#include "dfc/persistence.hpp"
#include "helpers.hpp"

using namespace dfc;

namespace {

PolicyParams sample_params() {
  PolicyParams p = init_params(16, 3);
  p.theta[0] = -0.0;
  p.theta[1] = 1e-310;  // subnormal
  p.theta[2] = 0.1;
  p.meta.lineage.push_back("conquer:x");
  p.meta.iteration = 7;
  return p;
}

std::string serialize(const PolicyParams& p) {
  std::ostringstream os(std::ios::binary);
  write_checkpoint(os, p);
  return os.str();
}

std::string error_of(const std::string& bytes, std::optional<int> dim = std::nullopt) {
  std::istringstream is(bytes, std::ios::binary);
  try {
    read_checkpoint(is, dim);
  } catch (const PersistenceError& e) {
    return e.what();
  }
  return "";
}

IterationMetrics sample_metrics(int t) {
  IterationMetrics m;
  m.iteration = t;
  m.wrc = {{"tictactoe", 0.375}, {"hanoi3", 0.1}};
  m.gf = {{"tictactoe", 1.0}, {"hanoi3", 0.9}};
  m.gate_wr = {{"tictactoe", 0.55}, {"hanoi3", 0.0}};
  m.seeds = {{"tictactoe", 30}, {"hanoi3", 20}};
  m.mean_steps = 6.25;
  m.mean_reward = -0.1 / 3.0;
  m.loss = 1e-17;
  m.kl = 0.0;
  m.epsilon = 0.05;
  m.trajectories = 400;
  m.kept = 300;
  m.format_penalized = 12;
  m.groups_used = 50;
  m.candidate_avg_wr = 0.275;
  m.best_avg_wr = 0.3;
  m.accepted = t % 2 == 0;
  return m;
}

}  // namespace

TEST_SUITE("persistence") {
  TEST_CASE("checkpoint round-trip is bit-exact") {
    const PolicyParams p = sample_params();
    const std::string bytes = serialize(p);
    std::istringstream is(bytes, std::ios::binary);
    const PolicyParams q = read_checkpoint(is, 16);
    REQUIRE(q.theta.size() == p.theta.size());
    CHECK(std::memcmp(q.theta.data(), p.theta.data(), p.theta.size() * sizeof(double)) == 0);
    CHECK(q.meta.lineage == p.meta.lineage);
    CHECK(q.meta.iteration == 7);
    CHECK(q.meta.feature_dim == 16);
    CHECK(bytes.substr(0, bytes.find('\n')) == "format_version=1 D=16 lineage=init:3,conquer:x iteration=7");
    CHECK(bytes.size() == bytes.find('\n') + 1 + 16 * 8);
  }

  TEST_CASE("checkpoint files round-trip and carry their path in errors") {
    const auto dir = dfc::testing::temp_dir("ckpt");
    const PolicyParams p = sample_params();
    save_checkpoint(dir / "p.ckpt", p);
    CHECK(load_checkpoint(dir / "p.ckpt").theta == p.theta);
    try {
      load_checkpoint(dir / "p.ckpt", 256);
      FAIL("expected an error");
    } catch (const PersistenceError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("p.ckpt") != std::string::npos);
      CHECK(msg.find("'D'") != std::string::npos);
    }
    CHECK_THROWS_AS(load_checkpoint(dir / "none.ckpt"), PersistenceError);
  }

  TEST_CASE("checkpoint corruption is reported by field") {
    const std::string good = serialize(sample_params());
    const auto nl = good.find('\n');
    const std::string body = good.substr(nl);

    CHECK(error_of(good, 8).find("'D'") != std::string::npos);

    std::string renamed = good;
    renamed.replace(renamed.find("D=16"), 1, "X");
    CHECK(error_of(renamed).find("'X'") != std::string::npos);

    CHECK(error_of("format_version=2 D=16 lineage=a iteration=0" + body).find("'format_version'") !=
          std::string::npos);
    CHECK(error_of("format_version=1 lineage=a iteration=0" + body).find("'D'") != std::string::npos);
    CHECK(error_of("format_version=1 D=16 D=16 lineage=a iteration=0" + body).find("duplicated") !=
          std::string::npos);
    CHECK(error_of("format_version=1 D=-4 lineage=a iteration=0" + body).find("'D'") !=
          std::string::npos);
    CHECK(error_of("format_version=1 D=16 lineage=a iteration=x" + body).find("'iteration'") !=
          std::string::npos);

    CHECK(error_of(good.substr(0, good.size() - 5)).find("truncated") != std::string::npos);
    CHECK(error_of(good + "x").find("trailing") != std::string::npos);
    CHECK(error_of("").find("empty") != std::string::npos);

    std::string nan = good;
    const std::uint64_t bits = 0x7ff8000000000000ull;
    for (int b = 0; b < 8; ++b) nan[nl + 1 + b] = static_cast<char>((bits >> (8 * b)) & 0xff);
    CHECK(error_of(nan).find("not finite") != std::string::npos);
  }

  TEST_CASE("lineage entries with separators are rejected") {
    PolicyParams p = init_params(4, 0);
    p.meta.lineage.push_back("bad entry");
    std::ostringstream os;
    CHECK_THROWS_AS(write_checkpoint(os, p), PersistenceError);
  }

  TEST_CASE("metrics records round-trip through JSON lines") {
    const MetricsRecord r{"run", "run.c1", sample_metrics(3)};
    const MetricsRecord back = parse_metrics_line(to_json_line(r));
    CHECK(back.run_id == "run");
    CHECK(back.phase == "run.c1");
    CHECK(to_json_line(back) == to_json_line(r));
    CHECK(back.metrics.mean_reward == r.metrics.mean_reward);
    CHECK(back.metrics.seeds == r.metrics.seeds);
    CHECK_THROWS_AS(parse_metrics_line("{"), PersistenceError);
    CHECK_THROWS_AS(parse_metrics_line(R"({"schema":"other/9"})"), PersistenceError);
  }

  TEST_CASE("metrics writer appends and the reader sees every record") {
    const auto dir = dfc::testing::temp_dir("metrics");
    {
      MetricsWriter w(dir / "m.jsonl");
      w.write({"run", "p", sample_metrics(1)});
      w.write({"run", "p", sample_metrics(2)});
    }
    {
      MetricsWriter w(dir / "m.jsonl", true);
      w.write({"run", "p", sample_metrics(3)});
    }
    const auto rs = read_metrics(dir / "m.jsonl");
    REQUIRE(rs.size() == 3);
    CHECK(rs[2].metrics.iteration == 3);
  }

  TEST_CASE("metrics csv has one row per record and stable columns") {
    std::vector<MetricsRecord> rs = {{"run", "p", sample_metrics(1)}, {"run", "p", sample_metrics(2)}};
    rs[1].metrics.wrc.erase("hanoi3");
    const std::string csv = metrics_csv(rs);
    std::istringstream is(csv);
    std::string header, a, b, extra;
    std::getline(is, header);
    std::getline(is, a);
    std::getline(is, b);
    CHECK_FALSE(std::getline(is, extra));
    auto cols = [](const std::string& s) { return std::count(s.begin(), s.end(), ',') + 1; };
    CHECK(cols(header) == 16 + 4 * 2);
    CHECK(cols(a) == cols(header));
    CHECK(cols(b) == cols(header));
    CHECK(header.rfind("run_id,phase,iteration,", 0) == 0);
    CHECK(header.find("wrc:hanoi3,wrc:tictactoe") != std::string::npos);
    CHECK(b.find(",,") != std::string::npos);
  }

  TEST_CASE("replays verify and tampering is detected") {
    const GameRegistry reg = register_builtin_games();
    const Featurizer f(256, 0);
    const PolicyParams p = init_params(256, 0);
    std::vector<Trajectory> rec;
    EvalOptions opts;
    opts.n_seeds = 3;
    opts.record = &rec;
    evaluate(p, f, reg, "tictactoe", parse_opponent("random"), opts);
    evaluate(p, f, reg, "liars_dice", parse_opponent("greedy"), opts);
    const auto dir = dfc::testing::temp_dir("replay");
    write_replay(dir / "r.jsonl", rec);
    auto steps = read_replay(dir / "r.jsonl");
    std::size_t total = 0;
    for (const auto& t : rec) total += t.steps.size();
    CHECK(steps.size() == total);
    CHECK(verify_replay(reg, steps).empty());

    auto wrong_outcome = steps;
    for (auto& s : wrong_outcome) {
      if (s.outcome == StepOutcome::Ongoing) {
        s.outcome = StepOutcome::Win;
        break;
      }
    }
    CHECK_FALSE(verify_replay(reg, wrong_outcome).empty());

    auto truncated = steps;
    truncated.pop_back();
    CHECK(verify_replay(reg, truncated).find("middle") != std::string::npos);

    auto bad_game = steps;
    bad_game[0].game_id = "chess";
    CHECK(verify_replay(reg, bad_game).find("unknown game") != std::string::npos);

    auto forged = steps;
    for (auto& s : forged) {
      if (s.outcome == StepOutcome::Win) {
        s.raw_action = "[??]";
        break;
      }
    }
    CHECK(verify_replay(reg, forged).find("recorded outcome") != std::string::npos);

    CHECK_THROWS_AS(parse_replay_line(R"({"schema":"dfc.replay/1"})"), PersistenceError);
  }
}
