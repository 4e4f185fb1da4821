#include "spincim/mitigation.hpp"

#include <json.hpp>

#include "spincim/errors.hpp"
#include "spincim/format.hpp"

namespace spincim::mitigation {

void ShiftEstimate::validate() const {
  if (!(0.0 < alpha && alpha < beta && beta < gamma)) {
    throw InvalidShift("shift estimate must satisfy 0 < alpha < beta < gamma, got (" + format_double(alpha) + ", " +
                       format_double(beta) + ", " + format_double(gamma) + ")");
  }
}

SenseConfig adapt_references(const SenseConfig& base, const CurrentLevelModel& levels, const ShiftEstimate& shift) {
  shift.validate();
  SenseConfig out = base;
  out.i_ref_or = (levels.i_apap + levels.i_app + shift.alpha + shift.beta) / 2.0;
  out.i_ref_and = (levels.i_app + levels.i_pp + shift.beta + shift.gamma) / 2.0;
  return out;
}

ShiftEstimate perfect_estimate(const MeanShift& truth) {
  ShiftEstimate e{truth.alpha, truth.beta, truth.gamma};
  e.validate();
  return e;
}

ShiftEstimate noisy_estimate(const MeanShift& truth, double sensor_sigma, RandomStream& rng) {
  if (sensor_sigma < 0.0) throw ConfigError("sensor sigma must be >= 0");
  ShiftEstimate e;
  e.alpha = truth.alpha + sensor_sigma * rng.normal();
  e.beta = truth.beta + sensor_sigma * rng.normal();
  e.gamma = truth.gamma + sensor_sigma * rng.normal();
  e.validate();
  return e;
}

const MitigationCell& MitigationReport::cell(CellPair pair, OpKind op) const {
  for (const auto& c : cells) {
    if (c.pair.p_count() == pair.p_count() && c.op == op) return c;
  }
  throw OutOfBounds("no mitigation cell for " + std::string(pair_name(pair)) + " " + std::string(to_string(op)));
}

namespace {

nlohmann::ordered_json sense_json(const SenseConfig& s) {
  return {{"i_ref_read", s.i_ref_read}, {"i_ref_or", s.i_ref_or}, {"i_ref_and", s.i_ref_and}};
}

}  // namespace

std::string MitigationReport::to_json() const {
  nlohmann::ordered_json j;
  j["base_references"] = sense_json(base);
  j["adapted_references"] = sense_json(adapted);
  auto arr = nlohmann::ordered_json::array();
  for (const auto& c : cells) {
    nlohmann::ordered_json jc;
    jc["pair"] = pair_name(c.pair);
    jc["op"] = to_string(c.op);
    jc["natural_rate"] = c.natural_rate;
    jc["before"] = nlohmann::ordered_json::parse(c.before.to_json());
    jc["after"] = nlohmann::ordered_json::parse(c.after.to_json());
    arr.push_back(jc);
  }
  j["cells"] = arr;
  return j.dump(2);
}

MitigationReport evaluate_mitigation(const DisturbanceModel& disturbance, const SenseConfig& adapted,
                                     const SenseConfig& base, const CurrentLevelModel& levels, std::uint64_t trials,
                                     std::uint64_t seed, unsigned threads) {
  if (trials < 1) throw ConfigError("trials must be >= 1");
  MitigationReport report{base, adapted, {}};
  const auto natural = DisturbanceModel::none();
  for (OpKind op : {OpKind::CimAND, OpKind::CimOR}) {
    for (CellPair pair : {kPairApAp, kPairApP, kPairPP}) {
      MitigationCell c;
      c.pair = pair;
      c.op = op;
      c.before = attack::mc_decode_failure(pair, op, disturbance, base, levels, trials, seed, threads);
      c.after = attack::mc_decode_failure(pair, op, disturbance, adapted, levels, trials, seed, threads);
      c.natural_rate = attack::analytic_decode_failure(pair, op, natural, base, levels);
      report.cells.push_back(c);
    }
  }
  return report;
}

}  // namespace spincim::mitigation
