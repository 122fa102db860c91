#include <cstdlib>

#include "doctest.h"
#include "dfc/config.hpp"
#include "helpers.hpp"

#include <fstream>

using namespace dfc;

TEST_SUITE("config") {
  TEST_CASE("defaults") {
    const RunConfig c;
    CHECK(c.feature_dim == 256);
    CHECK(c.group_size == 8);
    CHECK(c.epsilon == 0.05);
    CHECK(c.clip_eps == 0.1);
    CHECK(c.mps_a == 0.2);
    CHECK(c.mps_b == 0.8);
    CHECK(c.mps_eps1 == 0.1);
    CHECK(c.reward_mode == RewardMode::StepShaped);
    CHECK(c.games.size() == 7);
    CHECK_NOTHROW(c.validate());
  }

  TEST_CASE("canonical text round-trips") {
    RunConfig c;
    c.games = {"tictactoe", "hanoi3"};
    c.iterations = 17;
    c.epsilon = 0.125;
    c.kl_alpha = 0.3;
    c.master_seed = 18446744073709551615ull;
    c.reward_mode = RewardMode::EnvOnly;
    c.toggles.hn = false;
    c.gate = GateMode::TrainingRollouts;
    c.run_id = "abc";
    const RunConfig back = parse_config(to_text(c));
    CHECK(to_text(back) == to_text(c));
    CHECK(config_hash(back) == config_hash(c));
    CHECK(config_hash(back).size() == 16);
    CHECK(config_hash(RunConfig{}) != config_hash(c));
  }

  TEST_CASE("comments, blank lines and whitespace are ignored") {
    const RunConfig c = parse_config("# header\n\n  T = 5   # trailing\nS=3\n");
    CHECK(c.iterations == 5);
    CHECK(c.seeds_per_game == 3);
  }

  TEST_CASE("unknown keys and malformed lines are errors") {
    CHECK_THROWS_AS(parse_config("bogus = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("T 5\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("T = five\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("epsilon = 0.1x\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("fr = maybe\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("reward_mode = Shaped\n"), ConfigError);
    try {
      parse_config("T = 1\nbogus = 1\n");
      FAIL("expected an error");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
      CHECK(std::string(e.what()).find("bogus") != std::string::npos);
    }
  }

  TEST_CASE("hap and reward_mode must agree") {
    CHECK(parse_config("hap = off\n").reward_mode == RewardMode::EnvOnly);
    CHECK_NOTHROW(parse_config("hap = on\nreward_mode = StepShaped\n"));
    CHECK_THROWS_AS(parse_config("hap = off\nreward_mode = StepShaped\n"), ConfigError);
  }

  TEST_CASE("range validation") {
    CHECK_THROWS_AS(parse_config("epsilon = 1.5\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("clip_eps = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("D = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("T = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("r = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("a = 0\nb = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("games =\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("run_id = a,b\n"), ConfigError);
  }

  TEST_CASE("environment seed override") {
    RunConfig c;
    ::setenv("DFC_ARENA_SEED", "42", 1);
    apply_environment(c);
    CHECK(c.master_seed == 42);
    ::setenv("DFC_ARENA_SEED", "nope", 1);
    CHECK_THROWS_AS(apply_environment(c), ConfigError);
    ::unsetenv("DFC_ARENA_SEED");
    RunConfig d;
    apply_environment(d);
    CHECK(d.master_seed == 0);
  }

  TEST_CASE("loading from a file") {
    const auto dir = dfc::testing::temp_dir("config");
    std::ofstream(dir / "c.cfg") << "T = 9\n";
    CHECK(load_config(dir / "c.cfg").iterations == 9);
    CHECK_THROWS_AS(load_config(dir / "missing.cfg"), ConfigError);
  }
}
