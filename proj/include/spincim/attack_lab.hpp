#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "spincim/cim_array.hpp"
#include "spincim/cost_model.hpp"
#include "spincim/device_model.hpp"
#include "spincim/random.hpp"
#include "spincim/stats.hpp"

namespace spincim::attack {

/// Monte Carlo outcome paired with its closed-form expectation.
struct McReport {
  std::uint64_t trials = 0;
  std::uint64_t failures = 0;  ///< counted events (decode errors, or accepted logins)
  double rate = 0.0;
  Interval wilson_95_ci;
  double analytic_rate = 0.0;
  /// Standard error of `rate` under the analytic model: sqrt(sum p_i(1-p_i)) / N.
  double analytic_stderr = 0.0;
  std::uint64_t seed = 0;

  /// |rate - analytic_rate| <= k * analytic_stderr.
  bool agrees_with_oracle(double k = 3.0) const;
  std::string to_json() const;
};

/// Aggregates per-trial outcomes and per-trial analytic probabilities.
McReport make_report(const std::vector<std::uint8_t>& hits, const std::vector<double>& probabilities,
                     std::uint64_t seed);

/// Disturbance seen by heated senses at `zone_temp`: none at or below ambient,
/// otherwise the collapse law.
DisturbanceModel thermal_disturbance(const CurrentLevelModel& levels, const Collapse& collapse, double zone_temp);

/// Fraction of senses of `pair` under `op` whose decoded bit differs from the
/// Boolean truth. One pair-current sample per trial.
McReport mc_decode_failure(CellPair pair, OpKind op, const DisturbanceModel& disturbance, const SenseConfig& sense,
                           const CurrentLevelModel& levels, std::uint64_t trials, std::uint64_t seed,
                           unsigned threads = 1);

/// Closed-form probability behind mc_decode_failure.
double analytic_decode_failure(CellPair pair, OpKind op, const DisturbanceModel& disturbance,
                               const SenseConfig& sense, const CurrentLevelModel& levels);

/// CimAND failure of `pair` with the zone held at `zone_temp`.
McReport mc_failure_rate(CellPair pair, double zone_temp, std::uint64_t trials, std::uint64_t seed,
                         const CurrentLevelModel& levels, const Collapse& collapse, const SenseConfig& sense,
                         unsigned threads = 1);

// ---- authentication case study ----

struct Credentials {
  Word username;
  Word password;
};

struct AuthDb {
  std::vector<Credentials> entries;
};

enum class AttackVariant { None, GateLevel, XnorLevel };
std::string_view to_string(AttackVariant v);
AttackVariant parse_attack_variant(std::string_view s);

/// GateLevel heats the rows of the final CimAND; XnorLevel heats the operand
/// rows of both CimXNORs during their CimAND step.
struct AttackScenario {
  AttackVariant variant = AttackVariant::None;
  DisturbanceModel disturbance;

  /// Zero-noise CimAND-as-CimOR: a mean shift that lifts AP,P above the AND
  /// reference while AP,AP stays below it.
  static AttackScenario forced(AttackVariant variant, const CurrentLevelModel& levels, const SenseConfig& sense);
  static AttackScenario thermal(AttackVariant variant, const CurrentLevelModel& levels, const Collapse& collapse,
                                double zone_temp);
};

/// Row assignment inside bank 0: entry e occupies rows 2e (username) and
/// 2e + 1 (password); the last eight rows hold typed input, scratch and the
/// two match bits.
struct AuthLayout {
  RowAddress user_db(std::size_t entry) const { return {0, 2 * entry}; }
  RowAddress pass_db(std::size_t entry) const { return {0, 2 * entry + 1}; }
  RowAddress user_typed() const { return {0, rows - 8}; }
  RowAddress pass_typed() const { return {0, rows - 7}; }
  RowAddress scratch(std::size_t i) const { return {0, rows - 6 + i}; }
  RowAddress user_match() const { return {0, rows - 2}; }
  RowAddress pass_match() const { return {0, rows - 1}; }
  std::size_t capacity() const { return rows >= 8 ? (rows - 8) / 2 : 0; }

  std::size_t rows = 64;
};

struct AuthOutcome {
  bool accept = false;
  ExecutionTrace trace;
};

/// Evaluates (u_t XNOR u_d) AND (p_t XNOR p_d) in the array for each entry and
/// accepts if any entry matches. Match-bit reduction is controller side.
AuthOutcome run_auth(const AuthDb& db, const Credentials& typed, const AttackScenario& scenario,
                     const ArraySetup& setup, RandomStream& rng);

/// Exact acceptance probability of run_auth under independent per-sense
/// decode errors.
double analytic_accept_probability(const AuthDb& db, const Credentials& typed, const AttackScenario& scenario,
                                   const ArraySetup& setup);

enum class CredentialPolicy {
  Correct,                    ///< the stored username and password
  CorrectUserRandomPassword,  ///< right username, uniformly random password
  CorrectUserNearMiss,        ///< right username, password with one random bit flipped
  Random,                     ///< both uniformly random
};
std::string_view to_string(CredentialPolicy p);
CredentialPolicy parse_credential_policy(std::string_view s);

/// Credentials typed in trial drawn by `rng` against entry 0 of `db`.
Credentials draw_credentials(const AuthDb& db, CredentialPolicy policy, RandomStream& rng);

/// Empirical acceptance rate over `trials` attempts; analytic_rate averages
/// the exact per-attempt acceptance probability.
McReport attack_success_rate(const AuthDb& db, CredentialPolicy policy, const AttackScenario& scenario,
                             const ArraySetup& setup, std::uint64_t trials, std::uint64_t seed, unsigned threads = 1);

/// One entry with random `width`-bit username and password.
AuthDb random_db(std::size_t width, RandomStream& rng);

}  // namespace spincim::attack
