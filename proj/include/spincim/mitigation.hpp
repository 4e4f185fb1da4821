#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spincim/attack_lab.hpp"
#include "spincim/cim_array.hpp"
#include "spincim/device_model.hpp"
#include "spincim/random.hpp"

namespace spincim::mitigation {

/// Estimated mean increase of the AP,AP / AP,P / P,P levels, µA.
struct ShiftEstimate {
  double alpha = 0.2;
  double beta = 0.4;
  double gamma = 0.6;

  /// Throws InvalidShift unless 0 < alpha < beta < gamma.
  void validate() const;
  MeanShift as_mean_shift() const { return {alpha, beta, gamma}; }
};

/// Moves the OR and AND references to the midpoints of the shifted levels.
/// The read reference is left alone.
SenseConfig adapt_references(const SenseConfig& base, const CurrentLevelModel& levels, const ShiftEstimate& shift);

/// Exact knowledge of a MeanShift disturbance.
ShiftEstimate perfect_estimate(const MeanShift& truth);
/// Each component observed with independent Gaussian sensor error.
/// Throws InvalidShift when the noisy values lose their ordering.
ShiftEstimate noisy_estimate(const MeanShift& truth, double sensor_sigma, RandomStream& rng);

struct MitigationCell {
  CellPair pair;
  OpKind op = OpKind::CimAND;
  attack::McReport before;
  attack::McReport after;
  double natural_rate = 0.0;  ///< analytic rate, base references, no disturbance
};

struct MitigationReport {
  SenseConfig base;
  SenseConfig adapted;
  std::vector<MitigationCell> cells;

  /// Throws OutOfBounds when the cell was not evaluated.
  const MitigationCell& cell(CellPair pair, OpKind op) const;
  std::string to_json() const;
};

/// Decode failures of every pair under CimAND and CimOR with the base and the
/// adapted references. Before and after runs share per-trial streams.
MitigationReport evaluate_mitigation(const DisturbanceModel& disturbance, const SenseConfig& adapted,
                                     const SenseConfig& base, const CurrentLevelModel& levels, std::uint64_t trials,
                                     std::uint64_t seed, unsigned threads = 1);

}  // namespace spincim::mitigation
