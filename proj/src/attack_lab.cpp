#include "spincim/attack_lab.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include <json.hpp>

#include "spincim/errors.hpp"
#include "spincim/parallel.hpp"

namespace spincim::attack {

bool McReport::agrees_with_oracle(double k) const {
  return std::abs(rate - analytic_rate) <= k * analytic_stderr;
}

std::string McReport::to_json() const {
  nlohmann::ordered_json j;
  j["trials"] = trials;
  j["failures"] = failures;
  j["rate"] = rate;
  j["wilson_95_ci"] = {wilson_95_ci.lo, wilson_95_ci.hi};
  j["analytic_rate"] = analytic_rate;
  j["analytic_stderr"] = analytic_stderr;
  j["seed"] = seed;
  return j.dump(2);
}

McReport make_report(const std::vector<std::uint8_t>& hits, const std::vector<double>& probabilities,
                     std::uint64_t seed) {
  McReport r;
  r.seed = seed;
  r.trials = hits.size();
  double p_sum = 0.0;
  double var_sum = 0.0;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    r.failures += hits[i] ? 1 : 0;
    const double p = probabilities[i];
    p_sum += p;
    var_sum += p * (1.0 - p);
  }
  if (r.trials > 0) {
    const double n = static_cast<double>(r.trials);
    r.rate = static_cast<double>(r.failures) / n;
    r.analytic_rate = std::clamp(p_sum / n, 0.0, 1.0);
    r.analytic_stderr = std::sqrt(var_sum) / n;
  }
  r.wilson_95_ci = wilson_interval(r.failures, r.trials);
  return r;
}

DisturbanceModel thermal_disturbance(const CurrentLevelModel& levels, const Collapse& collapse, double zone_temp) {
  if (zone_temp < levels.ambient_temp) {
    throw ConfigError("zone temperature " + std::to_string(zone_temp) + " is below ambient");
  }
  if (zone_temp == levels.ambient_temp) {
    DisturbanceModel d;
    d.zone_temp = zone_temp;
    return d;
  }
  return DisturbanceModel::collapse(collapse, zone_temp);
}

namespace {

bool truth(OpKind op, CellPair pair) {
  const bool a = to_bit(pair.first);
  const bool b = to_bit(pair.second);
  switch (op) {
    case OpKind::CimAND:
      return a && b;
    case OpKind::CimOR:
      return a || b;
    case OpKind::CimNAND:
      return !(a && b);
    case OpKind::CimNOR:
      return !(a || b);
    case OpKind::CimXOR:
      return a != b;
    default:
      throw UnknownOp(std::string(to_string(op)) + " is not a two-row logic operation");
  }
}

// P(decoded bit == 1) for a two-row logic op.
double probability_one(CellPair pair, OpKind op, const DisturbanceModel& d, const SenseConfig& s,
                       const CurrentLevelModel& levels) {
  const auto rule = decode_rule(op, s);
  switch (rule.kind) {
    case DecodeKind::Threshold:
      return pair_exceedance(pair, levels, d, rule.lo);
    case DecodeKind::InvertedThreshold:
      return 1.0 - pair_exceedance(pair, levels, d, rule.lo);
    case DecodeKind::Window:
      return pair_window(pair, levels, d, rule.lo, rule.hi);
  }
  return 0.0;
}

}  // namespace

double analytic_decode_failure(CellPair pair, OpKind op, const DisturbanceModel& disturbance,
                               const SenseConfig& sense, const CurrentLevelModel& levels) {
  const double p1 = probability_one(pair, op, disturbance, sense, levels);
  return truth(op, pair) ? 1.0 - p1 : p1;
}

McReport mc_decode_failure(CellPair pair, OpKind op, const DisturbanceModel& disturbance, const SenseConfig& sense,
                           const CurrentLevelModel& levels, std::uint64_t trials, std::uint64_t seed,
                           unsigned threads) {
  if (trials < 1) throw ConfigError("trials must be >= 1");
  const bool expected = truth(op, pair);
  const auto rule = decode_rule(op, sense);
  const auto hits = parallel_map<std::uint8_t>(trials, threads, [&](std::size_t i) -> std::uint8_t {
    auto rng = RandomStream::for_trial(seed, i);
    const double current = sample_pair_current(pair, levels, disturbance, rng);
    return rule.apply(current) != expected;
  });
  const double p = analytic_decode_failure(pair, op, disturbance, sense, levels);
  return make_report(hits, std::vector<double>(hits.size(), p), seed);
}

McReport mc_failure_rate(CellPair pair, double zone_temp, std::uint64_t trials, std::uint64_t seed,
                         const CurrentLevelModel& levels, const Collapse& collapse, const SenseConfig& sense,
                         unsigned threads) {
  return mc_decode_failure(pair, OpKind::CimAND, thermal_disturbance(levels, collapse, zone_temp), sense, levels,
                           trials, seed, threads);
}

// ---- authentication ----

std::string_view to_string(AttackVariant v) {
  switch (v) {
    case AttackVariant::None:
      return "none";
    case AttackVariant::GateLevel:
      return "gate";
    case AttackVariant::XnorLevel:
      return "xnor";
  }
  return "?";
}

AttackVariant parse_attack_variant(std::string_view s) {
  if (s == "none") return AttackVariant::None;
  if (s == "gate") return AttackVariant::GateLevel;
  if (s == "xnor") return AttackVariant::XnorLevel;
  throw ConfigError("unknown attack variant '" + std::string(s) + "' (expected none | gate | xnor)");
}

AttackScenario AttackScenario::forced(AttackVariant variant, const CurrentLevelModel& levels,
                                      const SenseConfig& sense) {
  const double beta = (sense.i_ref_and - levels.i_app) + (levels.i_pp - sense.i_ref_and) / 2.0;
  const double alpha = std::min(beta / 2.0, (sense.i_ref_and - levels.i_apap) / 2.0);
  const double gamma = 2.0 * beta;
  AttackScenario s;
  s.variant = variant;
  s.disturbance = DisturbanceModel::mean_shift({alpha, beta, gamma});
  s.disturbance.validate();
  return s;
}

AttackScenario AttackScenario::thermal(AttackVariant variant, const CurrentLevelModel& levels,
                                       const Collapse& collapse, double zone_temp) {
  AttackScenario s;
  s.variant = variant;
  s.disturbance = thermal_disturbance(levels, collapse, zone_temp);
  return s;
}

namespace {

void check_db(const AuthDb& db, const Credentials& typed, const AuthLayout& layout, std::size_t width) {
  if (db.entries.empty()) throw ConfigError("authentication database is empty");
  if (db.entries.size() > layout.capacity()) {
    throw OutOfBounds("authentication database needs " + std::to_string(2 * db.entries.size() + 8) +
                      " rows in bank 0");
  }
  const auto check_word = [&](const Word& w) {
    if (w.width() != width) throw OutOfBounds("credential width " + std::to_string(w.width()) +
                                              " does not match the array word width " + std::to_string(width));
  };
  check_word(typed.username);
  check_word(typed.password);
  for (const auto& e : db.entries) {
    check_word(e.username);
    check_word(e.password);
  }
}

std::optional<ThermalZone> zone_for(const AttackScenario& scenario, const AuthLayout& layout,
                                    std::size_t entries) {
  if (scenario.variant == AttackVariant::None || scenario.disturbance.is_none()) return std::nullopt;
  ThermalZone zone;
  zone.disturbance = scenario.disturbance;
  zone.ops = {OpKind::CimAND};
  if (scenario.variant == AttackVariant::GateLevel) {
    zone.rows = {layout.user_match(), layout.pass_match()};
  } else {
    zone.rows = {layout.user_typed(), layout.pass_typed()};
    for (std::size_t e = 0; e < entries; ++e) {
      zone.rows.push_back(layout.user_db(e));
      zone.rows.push_back(layout.pass_db(e));
    }
  }
  return zone;
}

}  // namespace

AuthOutcome run_auth(const AuthDb& db, const Credentials& typed, const AttackScenario& scenario,
                     const ArraySetup& setup, RandomStream& rng) {
  const AuthLayout layout{setup.geometry.rows_per_bank};
  const std::size_t width = setup.geometry.cols_per_row;
  check_db(db, typed, layout, width);

  CimArray array(setup);
  for (std::size_t e = 0; e < db.entries.size(); ++e) {
    array.write_word(layout.user_db(e), db.entries[e].username, Channel::InMemory);
    array.write_word(layout.pass_db(e), db.entries[e].password, Channel::InMemory);
  }
  (void)array.take_trace();  // the database is resident before the login starts

  array.set_random_stream(std::move(rng));
  array.set_zone(zone_for(scenario, layout, db.entries.size()));
  array.write_word(layout.user_typed(), typed.username, Channel::Bus);
  array.write_word(layout.pass_typed(), typed.password, Channel::Bus);

  bool accept = false;
  for (std::size_t e = 0; e < db.entries.size(); ++e) {
    const bool user_ok =
        array.cim_xnor(layout.user_typed(), layout.user_db(e), layout.scratch(0), layout.scratch(1)).all_ones();
    const bool pass_ok =
        array.cim_xnor(layout.pass_typed(), layout.pass_db(e), layout.scratch(2), layout.scratch(3)).all_ones();
    array.write_word(layout.user_match(), Word(user_ok ? 1 : 0, width), Channel::InMemory);
    array.write_word(layout.pass_match(), Word(pass_ok ? 1 : 0, width), Channel::InMemory);
    if (array.cim_two_row(OpKind::CimAND, layout.user_match(), layout.pass_match()).bit(0)) accept = true;
  }
  rng = std::move(array.random_stream());
  return {accept, array.take_trace()};
}

double analytic_accept_probability(const AuthDb& db, const Credentials& typed, const AttackScenario& scenario,
                                   const ArraySetup& setup) {
  const AuthLayout layout{setup.geometry.rows_per_bank};
  const std::size_t width = setup.geometry.cols_per_row;
  check_db(db, typed, layout, width);
  const auto& levels = setup.levels;
  const auto& sense = setup.sense;
  const DisturbanceModel none;
  const bool heat_xnor = scenario.variant == AttackVariant::XnorLevel;
  const bool heat_gate = scenario.variant == AttackVariant::GateLevel;

  const auto match_probability = [&](const Word& typed_word, const Word& stored) {
    double p = 1.0;
    for (std::size_t col = 0; col < width; ++col) {
      const CellPair pair{from_bit(typed_word.bit(col)), from_bit(stored.bit(col))};
      const double and_one = pair_exceedance(pair, levels, heat_xnor ? scenario.disturbance : none, sense.i_ref_and);
      const double nor_one = 1.0 - pair_exceedance(pair, levels, none, sense.i_ref_or);
      p *= 1.0 - (1.0 - and_one) * (1.0 - nor_one);
    }
    return p;
  };

  double reject_all = 1.0;
  for (const auto& entry : db.entries) {
    const double pu = match_probability(typed.username, entry.username);
    const double pp = match_probability(typed.password, entry.password);
    double accept = 0.0;
    for (int mu = 0; mu <= 1; ++mu) {
      for (int mp = 0; mp <= 1; ++mp) {
        const double weight = (mu ? pu : 1.0 - pu) * (mp ? pp : 1.0 - pp);
        const CellPair pair{from_bit(mu), from_bit(mp)};
        accept += weight * pair_exceedance(pair, levels, heat_gate ? scenario.disturbance : none, sense.i_ref_and);
      }
    }
    reject_all *= 1.0 - accept;
  }
  return 1.0 - reject_all;
}

std::string_view to_string(CredentialPolicy p) {
  switch (p) {
    case CredentialPolicy::Correct:
      return "correct";
    case CredentialPolicy::CorrectUserRandomPassword:
      return "correct-user-random-password";
    case CredentialPolicy::CorrectUserNearMiss:
      return "correct-user-near-miss";
    case CredentialPolicy::Random:
      return "random";
  }
  return "?";
}

CredentialPolicy parse_credential_policy(std::string_view s) {
  for (auto p : {CredentialPolicy::Correct, CredentialPolicy::CorrectUserRandomPassword,
                 CredentialPolicy::CorrectUserNearMiss, CredentialPolicy::Random}) {
    if (to_string(p) == s) return p;
  }
  throw ConfigError("unknown credential policy '" + std::string(s) + "'");
}

Credentials draw_credentials(const AuthDb& db, CredentialPolicy policy, RandomStream& rng) {
  if (db.entries.empty()) throw ConfigError("authentication database is empty");
  const auto& stored = db.entries.front();
  const std::size_t width = stored.username.width();
  switch (policy) {
    case CredentialPolicy::Correct:
      return stored;
    case CredentialPolicy::CorrectUserRandomPassword:
      return {stored.username, Word(rng.bits(), width)};
    case CredentialPolicy::CorrectUserNearMiss: {
      Word pw = stored.password;
      const auto col = std::min(width - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(width)));
      pw.set_bit(col, !pw.bit(col));
      return {stored.username, pw};
    }
    case CredentialPolicy::Random: {
      const Word user(rng.bits(), width);
      return {user, Word(rng.bits(), width)};
    }
  }
  return stored;
}

McReport attack_success_rate(const AuthDb& db, CredentialPolicy policy, const AttackScenario& scenario,
                             const ArraySetup& setup, std::uint64_t trials, std::uint64_t seed, unsigned threads) {
  if (trials < 1) throw ConfigError("trials must be >= 1");
  struct Outcome {
    std::uint8_t accept = 0;
    double probability = 0.0;
  };
  const auto outcomes = parallel_map<Outcome>(trials, threads, [&](std::size_t i) {
    auto rng = RandomStream::for_trial(seed, i);
    const Credentials typed = draw_credentials(db, policy, rng);
    Outcome o;
    o.accept = run_auth(db, typed, scenario, setup, rng).accept;
    o.probability = analytic_accept_probability(db, typed, scenario, setup);
    return o;
  });
  std::vector<std::uint8_t> hits(outcomes.size());
  std::vector<double> probabilities(outcomes.size());
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    hits[i] = outcomes[i].accept;
    probabilities[i] = outcomes[i].probability;
  }
  return make_report(hits, probabilities, seed);
}

AuthDb random_db(std::size_t width, RandomStream& rng) {
  const Word user(rng.bits(), width);
  const Word pass(rng.bits(), width);
  return AuthDb{{Credentials{user, pass}}};
}

}  // namespace spincim::attack
