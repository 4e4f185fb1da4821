#include <catch_amalgamated.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

#include <json.hpp>

#include "commands.hpp"

using namespace spincim;
namespace fs = std::filesystem;

namespace {

struct Run {
  int status = -1;
  std::string out;
};

Run run_cli(const std::string& args) {
  const std::string cmd = std::string(SPINCIM_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path scratch_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("spincim_test_" + name);
  fs::remove_all(d);
  return d;
}

const std::string kProgram = std::string(SPINCIM_PROGRAMS_DIR) + "/add.cim";

}  // namespace

TEST_CASE("margins subcommand") {
  const auto r = run_cli("margins");
  REQUIRE(r.status == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("read_margin_uA") == 5.5);
  CHECK(j.at("or_margin_uA") == 3.2);
  CHECK(j.at("and_margin_uA") == 2.5);
  CHECK(j.at("config_hash").get<std::string>().size() == 64);
  CHECK(r.out.find("\"or_margin_uA\": 3.2,") != std::string::npos);
}

TEST_CASE("truth-table subcommand reproduces AND") {
  const auto r = run_cli("truth-table --op CimAND --noise 0");
  REQUIRE(r.status == 0);
  const auto rows = nlohmann::json::parse(r.out).at("tables").at(0).at("rows");
  REQUIRE(rows.size() == 4);
  for (const auto& row : rows) CHECK(row.at("out") == (row.at("a").get<int>() & row.at("b").get<int>()));
}

TEST_CASE("mc-failure subcommand") {
  const auto r = run_cli("mc-failure --temp 100 --pair AP,P --trials 10000 --seed 3");
  REQUIRE(r.status == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("seed") == 3);
  CHECK_THAT(j.at("report").at("rate").get<double>(), Catch::Matchers::WithinAbs(0.044, 0.006));
}

TEST_CASE("isa-run compares against the lowering") {
  const auto r = run_cli("isa-run --program " + kProgram + " --compare-lowered");
  REQUIRE(r.status == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("direct").at("memory_access_count") == 1);
  CHECK(j.at("direct").at("instruction_count") == 1);
  CHECK(j.at("lowered").at("memory_access_count") == 3);
  CHECK(j.at("lowered").at("instruction_count") == 4);
}

TEST_CASE("reports are byte-identical across runs and thread counts") {
  for (const std::string sub : {"mc-failure --table", "auth-attack --variant gate --policy correct-user-random-password",
                                "mitigate --disturbance collapse"}) {
    const auto d1 = scratch_dir("det1"), d2 = scratch_dir("det2");
    const auto a = run_cli(sub + " --trials 3000 --seed 11 --threads 1 --out " + d1.string());
    const auto b = run_cli(sub + " --trials 3000 --seed 11 --threads 5 --out " + d2.string());
    REQUIRE(a.status == 0);
    REQUIRE(b.status == 0);
    CHECK(a.out == b.out);
    for (const auto& entry : fs::directory_iterator(d1)) {
      INFO(entry.path());
      CHECK(slurp(entry.path()) == slurp(d2 / entry.path().filename()));
    }
  }
}

TEST_CASE("exit codes") {
  CHECK(run_cli("").status == 1);
  CHECK(run_cli("no-such-command").status == 1);
  CHECK(run_cli("mc-failure --pair XX").status == 1);
  CHECK(run_cli("margins --help").status == 0);

  const auto d = scratch_dir("cfg");
  fs::create_directories(d);
  std::ofstream(d / "bad.json") << R"({"device": {"bogus": 1}})";
  CHECK(run_cli("margins --config " + (d / "bad.json").string()).status == 1);
  std::ofstream(d / "prog.cim") << "CimAND @0, @0, @1\n";
  CHECK(run_cli("isa-run --program " + (d / "prog.cim").string()).status == 2);
  std::ofstream(d / "syntax.cim") << "FROB @0\n";
  CHECK(run_cli("isa-run --program " + (d / "syntax.cim").string()).status == 1);
}

TEST_CASE("config file overrides and writes to its output directory") {
  const auto d = scratch_dir("cfgout");
  fs::create_directories(d);
  std::ofstream(d / "cfg.json") << R"({"seed": 77, "output_dir": ")" + (d / "out").string() + R"("})";
  const auto r = run_cli("margins --config " + (d / "cfg.json").string());
  REQUIRE(r.status == 0);
  CHECK(nlohmann::json::parse(r.out).at("seed") == 77);
  CHECK(fs::exists(d / "out" / "margins.json"));
}

TEST_CASE("command layer matches the binary") {
  const ExperimentConfig cfg;
  CHECK(cli::margins(cfg).json == run_cli("margins").out);
}
