#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spincim/attack_lab.hpp"
#include "spincim/cim_array.hpp"
#include "spincim/cost_model.hpp"
#include "spincim/device_model.hpp"
#include "spincim/mitigation.hpp"
#include "spincim/sca.hpp"

namespace spincim {

struct DeviceSection {
  CurrentLevelModel levels;
  Collapse collapse;
};

struct AttackSection {
  std::size_t credential_width = 16;
  attack::AttackVariant variant = attack::AttackVariant::XnorLevel;
  attack::CredentialPolicy policy = attack::CredentialPolicy::Random;
  bool forced = false;  ///< forced flip instead of the thermal collapse law
  double temperature = 100.0;
  CellPair pair = kPairApP;
};

struct ScaSection {
  std::vector<double> sigma_energy_fj = {0.5, 1.0, 2.0, 5.0};
  double sigma_duration_ns = 0.05;
  std::size_t per_class = 10000;
  std::size_t hw_width = 12;
  double hw_sigma_energy_fj = 0.0;
};

enum class MitigationDisturbance { None, MeanShift, Collapse };

struct MitigationSection {
  mitigation::ShiftEstimate shift;
  MitigationDisturbance disturbance = MitigationDisturbance::MeanShift;
  double temperature = 100.0;
  double sensor_sigma = 0.0;
};

/// Everything an experiment reads. Defaults are the calibrated model.
struct ExperimentConfig {
  DeviceSection device;
  ArrayGeometry geometry;
  SenseConfig sense;
  TableVariant variant = TableVariant::Enhanced;
  CostTable costs = CostTable::defaults();
  AttackSection attack;
  ScaSection sca;
  MitigationSection mitigation;
  std::uint64_t seed = 1;
  std::uint64_t trials = 10000;
  unsigned threads = 1;
  std::string output_dir = "out";

  ArraySetup array_setup() const;
  /// Throws ConfigError on any out-of-range value.
  void validate() const;

  /// Canonical JSON; key order is fixed.
  std::string to_json() const;
  /// Missing keys keep their defaults; unknown keys throw ConfigError.
  static ExperimentConfig from_json(const std::string& text);
  /// Throws IoError when the file cannot be read.
  static ExperimentConfig load(const std::string& path);

  /// SHA-256 of the canonical JSON without `threads` and `output_dir`, which
  /// do not affect results.
  std::string hash() const;
};

std::string_view to_string(MitigationDisturbance d);

}  // namespace spincim
