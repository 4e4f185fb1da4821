#include <catch_amalgamated.hpp>

#include <json.hpp>

#include "spincim/config.hpp"
#include "spincim/digest.hpp"
#include "spincim/errors.hpp"

using namespace spincim;

TEST_CASE("sha256 known answer") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("defaults round-trip through JSON") {
  const ExperimentConfig c;
  const auto back = ExperimentConfig::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());
  CHECK(back.hash() == c.hash());
  CHECK(back.device.collapse.a == Collapse{}.a);
  CHECK(back.costs.enhanced.size() == 11);
}

TEST_CASE("partial configs keep defaults") {
  const auto c = ExperimentConfig::from_json(R"({"seed": 42, "attack": {"variant": "gate"}})");
  CHECK(c.seed == 42);
  CHECK(c.attack.variant == attack::AttackVariant::GateLevel);
  CHECK(c.device.levels.i_pp == 22.7);
  CHECK(c.hash() != ExperimentConfig{}.hash());
}

TEST_CASE("unknown keys are rejected") {
  CHECK_THROWS_AS(ExperimentConfig::from_json(R"({"sede": 1})"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(R"({"device": {"sigmaa": 1}})"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(R"({"device": {"collapse": {"c": 1}}})"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(R"({"cost": {"enhanced": {"CimFOO": {}}}})"), ConfigError);
  try {
    ExperimentConfig::from_json(R"({"mitigation": {"alpah": 0.1}})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("mitigation.alpah") != std::string::npos);
  }
}

TEST_CASE("invalid values are rejected") {
  CHECK_THROWS_AS(ExperimentConfig::from_json("{not json"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(R"({"seed": "x"})"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(R"({"device": {"sigma": -1}})"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(R"({"array": {"i_ref_and": 30}})"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(R"({"mitigation": {"alpha": 0.5}})"), InvalidShift);
  CHECK_THROWS_AS(ExperimentConfig::from_json(R"({"array": {"variant": "fancy"}})"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(R"({"trials": 0})"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::load("/nonexistent/config.json"), IoError);
}

TEST_CASE("execution-only fields do not change the hash") {
  ExperimentConfig a;
  ExperimentConfig b;
  b.threads = 8;
  b.output_dir = "elsewhere";
  CHECK(a.hash() == b.hash());
  b.trials = 5;
  CHECK(a.hash() != b.hash());
}

TEST_CASE("array setup mirrors config") {
  ExperimentConfig c;
  c.variant = TableVariant::Standard;
  c.geometry.rows_per_bank = 32;
  const auto s = c.array_setup();
  CHECK(s.variant == TableVariant::Standard);
  CHECK(s.geometry.rows_per_bank == 32);
  CHECK(s.levels.sigma == c.device.levels.sigma);
}
