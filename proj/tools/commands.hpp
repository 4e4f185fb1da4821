#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spincim/config.hpp"

namespace spincim::cli {

/// One subcommand's output: a JSON report plus optional side files (CSV).
struct Report {
  std::string name;
  std::string json;
  std::vector<std::pair<std::string, std::string>> files;
};

Report margins(const ExperimentConfig& cfg);

/// All ops when `op` is empty. `noise` overrides the device sigma.
Report truth_table(const ExperimentConfig& cfg, std::optional<OpKind> op, std::optional<double> noise);

struct McFailureArgs {
  std::optional<double> temp;
  std::optional<CellPair> pair;
  OpKind op = OpKind::CimAND;
  bool table = false;  ///< every (pair, temperature) cell of the failure table
};
Report mc_failure(const ExperimentConfig& cfg, const McFailureArgs& args);

Report auth_attack(const ExperimentConfig& cfg);

struct IsaRunArgs {
  std::string program_path;
  std::optional<std::string> memory_path;
  bool compare_lowered = false;
  std::optional<double> noise;
};
Report isa_run(const ExperimentConfig& cfg, const IsaRunArgs& args);

Report sca(const ExperimentConfig& cfg);

Report mitigate(const ExperimentConfig& cfg);

Report calibrate(const ExperimentConfig& cfg);

/// Writes `<dir>/<name>.json` and the side files. Throws IoError.
void write_report(const Report& report, const std::string& dir);

}  // namespace spincim::cli
