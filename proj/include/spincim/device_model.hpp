#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <utility>
#include <variant>

#include "spincim/random.hpp"

namespace spincim {

/// Magnetic orientation of one MTJ. P (low resistance) stores `1`, AP stores `0`.
enum class MtjState : std::uint8_t { AP = 0, P = 1 };

constexpr bool to_bit(MtjState s) { return s == MtjState::P; }
constexpr MtjState from_bit(bool bit) { return bit ? MtjState::P : MtjState::AP; }

std::string_view to_string(MtjState s);

/// Two cells sensed together on one column. (AP,P) and (P,AP) share a level.
struct CellPair {
  MtjState first = MtjState::AP;
  MtjState second = MtjState::AP;

  constexpr int p_count() const { return (first == MtjState::P) + (second == MtjState::P); }
  constexpr int ap_count() const { return 2 - p_count(); }
};

inline constexpr CellPair kPairApAp{MtjState::AP, MtjState::AP};
inline constexpr CellPair kPairApP{MtjState::AP, MtjState::P};
inline constexpr CellPair kPairPP{MtjState::P, MtjState::P};

std::string_view pair_name(CellPair pair);
/// Accepts "AP,AP", "AP,P", "P,AP", "P,P".
CellPair parse_pair(std::string_view text);

/// Mean sense currents in µA. Only the margins between adjacent levels are
/// normative; the absolute offsets are free.
struct CurrentLevelModel {
  double i_ap = 10.0;
  double i_p = 15.5;
  double i_apap = 17.0;
  double i_app = 20.2;
  double i_pp = 22.7;
  double sigma = 0.4852806;  ///< sense-node Gaussian noise, µA
  double ambient_temp = 20.0;  ///< °C

  double single_level(MtjState s) const { return s == MtjState::P ? i_p : i_ap; }
  /// Pair level indexed by number of P cells (0, 1, 2).
  double pair_level(int p_count) const;

  double read_margin() const { return i_p - i_ap; }
  double low_pair_margin() const { return i_app - i_apap; }
  double high_pair_margin() const { return i_pp - i_app; }

  /// Throws ConfigError if level ordering or sigma > 0 is violated.
  void validate() const;
  /// Like validate() but also accepts sigma == 0 (noise-free runs).
  void validate_allow_zero_noise() const;
};

/// Uniform increase of the three pair levels under heat.
struct MeanShift {
  double alpha = 0.0;  ///< AP,AP
  double beta = 0.0;   ///< AP,P
  double gamma = 0.0;  ///< P,P
};

/// Heated AP cells occasionally collapse to the P level with probability
/// rho(dT) = exp(a + b * dT), clamped to [0, 1].
struct Collapse {
  double a = -9.0975138;
  double b = 0.07332248;
};

struct DisturbanceModel {
  std::variant<std::monostate, MeanShift, Collapse> kind;
  double zone_temp = 20.0;

  static DisturbanceModel none() { return {}; }
  static DisturbanceModel mean_shift(MeanShift shift, double zone_temp = 20.0) {
    return {shift, zone_temp};
  }
  static DisturbanceModel collapse(Collapse c, double zone_temp) { return {c, zone_temp}; }

  bool is_none() const { return std::holds_alternative<std::monostate>(kind); }

  /// rho(dT) with dT = zone_temp - ambient floored at 0; zero unless Collapse.
  double collapse_probability(double ambient_temp) const;
  /// Added mean for a pair level with `p_count` P cells; zero unless MeanShift.
  double level_shift(int p_count) const;

  /// Throws InvalidShift for MeanShift outside 0 < alpha < beta < gamma.
  void validate() const;
};

double sample_single_current(MtjState state, const CurrentLevelModel& model,
                             const DisturbanceModel& disturbance, RandomStream& rng);

double sample_pair_current(CellPair pair, const CurrentLevelModel& model,
                           const DisturbanceModel& disturbance, RandomStream& rng);

/// Closed-form P(I > threshold) for one cell.
double single_exceedance(MtjState state, const CurrentLevelModel& model,
                         const DisturbanceModel& disturbance, double threshold);

/// Closed-form P(I > threshold) for a cell pair, summing over the number of
/// collapsed AP cells.
double pair_exceedance(CellPair pair, const CurrentLevelModel& model,
                       const DisturbanceModel& disturbance, double threshold);

/// Closed-form P(lo < I <= hi) for a cell pair.
double pair_window(CellPair pair, const CurrentLevelModel& model,
                   const DisturbanceModel& disturbance, double lo, double hi);

// ---- calibration against the CimAND failure table ----

struct FailureTargets {
  double natural_app = 0.005;  ///< AP,P > ref_and at ambient
  double warm_temp = 50.0;
  double warm_app = 0.006;
  double warm_apap = 0.0;
  double hot_temp = 100.0;
  double hot_app = 0.044;
  double hot_apap = 0.003;
};

struct CalibrationResult {
  double sigma = 0.0;
  Collapse collapse;
  /// RMS error of the fitted analytic rates over the four heated cells.
  double residual = 0.0;
};

/// Solves the noise sigma from the natural AP,P rate, then least-squares fits
/// the collapse law to the heated rows. Pair levels and ambient come from
/// `levels`; `and_reference` is the CimAND sense reference.
CalibrationResult calibrate(const FailureTargets& targets, const CurrentLevelModel& levels,
                            double and_reference, double residual_bound = 0.002);

}  // namespace spincim
