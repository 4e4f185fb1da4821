#include "commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "spincim/attack_lab.hpp"
#include "spincim/errors.hpp"
#include "spincim/format.hpp"
#include "spincim/isa.hpp"
#include "spincim/mitigation.hpp"
#include "spincim/sca.hpp"

namespace spincim::cli {

using nlohmann::ordered_json;

namespace {

ordered_json header(const std::string& command, const ExperimentConfig& cfg) {
  ordered_json j;
  j["command"] = command;
  j["config_hash"] = cfg.hash();
  j["seed"] = cfg.seed;
  return j;
}

ordered_json mc_json(const attack::McReport& r) { return ordered_json::parse(r.to_json()); }

Report finish(const std::string& name, const ordered_json& j) { return {name, j.dump(2) + "\n", {}}; }

// Level differences like 20.2 - 17.0 carry binary noise in the last bits.
double tidy(double v) { return std::round(v * 1e9) / 1e9; }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

Report margins(const ExperimentConfig& cfg) {
  const auto& l = cfg.device.levels;
  auto j = header("margins", cfg);
  j["read_margin_uA"] = tidy(l.read_margin());
  j["or_margin_uA"] = tidy(l.low_pair_margin());
  j["and_margin_uA"] = tidy(l.high_pair_margin());
  return finish("margins", j);
}

Report truth_table(const ExperimentConfig& cfg, std::optional<OpKind> op, std::optional<double> noise) {
  CurrentLevelModel levels = cfg.device.levels;
  if (noise) levels.sigma = *noise;
  levels.validate_allow_zero_noise();
  const auto none = DisturbanceModel::none();
  const auto& sense = cfg.sense;

  std::vector<OpKind> ops;
  if (op) {
    if (*op == OpKind::Write) throw ConfigError("truth-table: Write has no sensed output");
    ops.push_back(*op);
  } else {
    for (auto k : kAllOpKinds) {
      if (k != OpKind::Write) ops.push_back(k);
    }
  }

  auto j = header("truth-table", cfg);
  j["sigma_uA"] = levels.sigma;
  std::ostringstream csv;
  csv << "op,a,b,carry_in,out,carry_out\n";
  auto tables = ordered_json::array();
  std::uint64_t stream = 0;
  for (OpKind k : ops) {
    auto rows = ordered_json::array();
    const auto emit = [&](int a, int b, int cin, bool out, std::optional<bool> cout) {
      ordered_json r;
      r["a"] = a;
      if (b >= 0) r["b"] = b;
      if (cin >= 0) r["carry_in"] = cin;
      r["out"] = out ? 1 : 0;
      if (cout) r["carry_out"] = *cout ? 1 : 0;
      rows.push_back(r);
      csv << to_string(k) << ',' << a << ',' << (b >= 0 ? std::to_string(b) : "") << ','
          << (cin >= 0 ? std::to_string(cin) : "") << ',' << (out ? 1 : 0) << ','
          << (cout ? std::to_string(*cout ? 1 : 0) : "") << '\n';
    };
    if (!is_two_row(k) && k != OpKind::CimADD) {
      for (int a = 0; a <= 1; ++a) {
        auto rng = RandomStream::for_trial(cfg.seed, stream++);
        const double i = sample_single_current(from_bit(a), levels, none, rng);
        emit(a, -1, -1, decode(k, i, sense), std::nullopt);
      }
    } else if (k == OpKind::CimADD) {
      for (int cin = 0; cin <= 1; ++cin) {
        for (int a = 0; a <= 1; ++a) {
          for (int b = 0; b <= 1; ++b) {
            auto rng = RandomStream::for_trial(cfg.seed, stream++);
            const double i = sample_pair_current({from_bit(a), from_bit(b)}, levels, none, rng);
            const bool x = decode(OpKind::CimXOR, i, sense);
            const bool g = decode(OpKind::CimAND, i, sense);
            const bool p = decode(OpKind::CimOR, i, sense);
            emit(a, b, cin, x != (cin == 1), g || (p && cin == 1));
          }
        }
      }
    } else {
      for (int a = 0; a <= 1; ++a) {
        for (int b = 0; b <= 1; ++b) {
          auto rng = RandomStream::for_trial(cfg.seed, stream++);
          const double i = sample_pair_current({from_bit(a), from_bit(b)}, levels, none, rng);
          emit(a, b, -1, decode(k, i, sense), std::nullopt);
        }
      }
    }
    tables.push_back({{"op", to_string(k)}, {"rows", rows}});
  }
  j["tables"] = tables;
  auto report = finish("truth-table", j);
  report.files.emplace_back("truth-table.csv", csv.str());
  return report;
}

Report mc_failure(const ExperimentConfig& cfg, const McFailureArgs& args) {
  const auto& levels = cfg.device.levels;
  auto j = header("mc-failure", cfg);
  j["op"] = to_string(args.op);
  j["trials"] = cfg.trials;
  const auto cell = [&](CellPair pair, double temp) {
    const auto dist = attack::thermal_disturbance(levels, cfg.device.collapse, temp);
    const auto r = attack::mc_decode_failure(pair, args.op, dist, cfg.sense, levels, cfg.trials, cfg.seed, cfg.threads);
    ordered_json c;
    c["pair"] = pair_name(pair);
    c["temperature_C"] = temp;
    c["report"] = mc_json(r);
    c["agrees_with_oracle_3sigma"] = r.agrees_with_oracle();
    return c;
  };
  if (args.table) {
    auto cells = ordered_json::array();
    std::ostringstream csv;
    csv << "pair,temperature_C,trials,failures,rate,analytic_rate\n";
    for (CellPair pair : {kPairApAp, kPairApP}) {
      for (double t : {20.0, 50.0, 100.0}) {
        auto c = cell(pair, t);
        csv << c["pair"].get<std::string>() << ',' << format_double(t) << ',' << c["report"]["trials"].get<std::uint64_t>()
            << ',' << c["report"]["failures"].get<std::uint64_t>() << ','
            << format_double(c["report"]["rate"].get<double>()) << ','
            << format_double(c["report"]["analytic_rate"].get<double>()) << '\n';
        cells.push_back(std::move(c));
      }
    }
    j["cells"] = cells;
    auto report = finish("mc-failure", j);
    report.files.emplace_back("mc-failure.csv", csv.str());
    return report;
  }
  const auto c = cell(args.pair.value_or(cfg.attack.pair), args.temp.value_or(cfg.attack.temperature));
  for (const auto& [k, v] : c.items()) j[k] = v;
  return finish("mc-failure", j);
}

Report auth_attack(const ExperimentConfig& cfg) {
  auto setup = cfg.array_setup();
  const auto& a = cfg.attack;
  setup.geometry.cols_per_row = a.credential_width;
  auto db_rng = RandomStream::for_trial(cfg.seed, ~std::uint64_t{0});
  const auto db = attack::random_db(a.credential_width, db_rng);
  const auto scenario = a.forced ? attack::AttackScenario::forced(a.variant, setup.levels, setup.sense)
                                 : attack::AttackScenario::thermal(a.variant, setup.levels, cfg.device.collapse,
                                                                   a.temperature);
  const auto r = attack::attack_success_rate(db, a.policy, scenario, setup, cfg.trials, cfg.seed, cfg.threads);
  auto j = header("auth-attack", cfg);
  j["variant"] = attack::to_string(a.variant);
  j["policy"] = attack::to_string(a.policy);
  j["disturbance"] = a.forced ? "forced" : "thermal";
  if (!a.forced) j["temperature_C"] = a.temperature;
  j["credential_width"] = a.credential_width;
  j["acceptance"] = mc_json(r);
  j["agrees_with_oracle_3sigma"] = r.agrees_with_oracle();
  return finish("auth-attack", j);
}

Report isa_run(const ExperimentConfig& cfg, const IsaRunArgs& args) {
  const auto program = isa::assemble(read_file(args.program_path));
  auto setup = cfg.array_setup();
  if (args.noise) setup.levels.sigma = *args.noise;
  setup.levels.validate_allow_zero_noise();
  const auto fresh = [&] {
    isa::Machine m(setup, cfg.seed);
    if (args.memory_path) m.array.import_hex(read_file(*args.memory_path));
    return m;
  };

  auto direct = fresh();
  const auto result = isa::run(program, direct);
  auto j = header("isa-run", cfg);
  j["program"] = std::filesystem::path(args.program_path).filename().string();
  j["sigma_uA"] = setup.levels.sigma;
  j["direct"] = ordered_json::parse(result.stats.to_json());
  Report report;
  report.files.emplace_back("isa-run.trace.csv", result.trace.to_csv());
  report.files.emplace_back("isa-run.memory.hex", direct.array.export_hex());
  if (args.compare_lowered) {
    const auto lowered = isa::lower_to_conventional(program);
    auto conv = fresh();
    const auto lr = isa::run(lowered, conv);
    j["lowered"] = ordered_json::parse(lr.stats.to_json());
    j["memory_equal"] = conv.array.export_hex() == direct.array.export_hex();
    report.files.emplace_back("isa-run.lowered.trace.csv", lr.trace.to_csv());
  }
  j["fingerprint"] = isa::static_fingerprint(isa::describe(direct));
  report.name = "isa-run";
  report.json = j.dump(2) + "\n";
  return report;
}

Report sca(const ExperimentConfig& cfg) {
  const auto& s = cfg.sca;
  auto j = header("sca", cfg);
  j["per_class"] = s.per_class;
  j["sigma_duration_ns"] = s.sigma_duration_ns;
  Report report;
  std::ostringstream acc_csv;
  acc_csv << "sigma_energy_fJ,accuracy_4class,accuracy_11class\n";
  std::vector<double> levels{0.0};
  levels.insert(levels.end(), s.sigma_energy_fj.begin(), s.sigma_energy_fj.end());
  auto rows = ordered_json::array();
  for (double se : levels) {
    const sca::ObservationNoise noise{se == 0.0 ? 0.0 : s.sigma_duration_ns, se};
    const auto c4 = sca::classification_experiment(kStandardClasses, cfg.costs.standard, s.per_class, noise, cfg.seed);
    const auto c11 = sca::classification_experiment(kEnhancedClasses, cfg.costs.enhanced, s.per_class, noise, cfg.seed);
    rows.push_back({{"sigma_duration_ns", noise.sigma_duration_ns},
                    {"sigma_energy_fJ", se},
                    {"accuracy_4class", c4.accuracy},
                    {"accuracy_11class", c11.accuracy},
                    {"eleven_not_better", c11.accuracy <= c4.accuracy}});
    acc_csv << format_double(se) << ',' << format_double(c4.accuracy) << ',' << format_double(c11.accuracy) << '\n';
    report.files.emplace_back("sca.confusion4.sigmaE_" + format_double(se) + ".csv", c4.to_csv());
    report.files.emplace_back("sca.confusion11.sigmaE_" + format_double(se) + ".csv", c11.to_csv());
  }
  j["classification"] = rows;

  CostTable bitwise = cfg.costs;
  bitwise.mode = CostMode::PerBitWrites;
  const auto hw = sca::hamming_weight_recovery(s.hw_width, s.hw_sigma_energy_fj, bitwise, TableVariant::Standard,
                                               cfg.trials, cfg.seed);
  j["hamming_weight"] = {{"width", s.hw_width}, {"sigma_energy_fJ", s.hw_sigma_energy_fj}, {"exact_recovery", mc_json(hw)}};

  std::vector<sca::ObservationNoise> obscuring_levels{{0.0, 0.0}};
  for (double se : s.sigma_energy_fj) obscuring_levels.push_back({s.sigma_duration_ns, se});
  obscuring_levels.push_back({0.5, 10.0});
  const auto ob = sca::obscuring_experiment(obscuring_levels, cfg.costs, s.per_class, cfg.trials, cfg.seed);
  j["obscuring"] = ordered_json::parse(ob.to_json());

  report.files.emplace_back("sca.accuracy.csv", acc_csv.str());
  report.name = "sca";
  report.json = j.dump(2) + "\n";
  return report;
}

Report mitigate(const ExperimentConfig& cfg) {
  const auto& m = cfg.mitigation;
  const auto& levels = cfg.device.levels;
  DisturbanceModel dist;
  switch (m.disturbance) {
    case MitigationDisturbance::None: dist = DisturbanceModel::none(); break;
    case MitigationDisturbance::MeanShift: dist = DisturbanceModel::mean_shift(m.shift.as_mean_shift(), m.temperature); break;
    case MitigationDisturbance::Collapse: dist = attack::thermal_disturbance(levels, cfg.device.collapse, m.temperature); break;
  }
  auto estimate = m.shift;
  if (m.sensor_sigma > 0.0) {
    auto rng = RandomStream::for_trial(cfg.seed, ~std::uint64_t{0});
    estimate = mitigation::noisy_estimate(m.shift.as_mean_shift(), m.sensor_sigma, rng);
  }
  const auto adapted = mitigation::adapt_references(cfg.sense, levels, estimate);
  const auto r = mitigation::evaluate_mitigation(dist, adapted, cfg.sense, levels, cfg.trials, cfg.seed, cfg.threads);
  auto j = header("mitigate", cfg);
  j["disturbance"] = to_string(m.disturbance);
  j["estimate"] = {{"alpha", estimate.alpha}, {"beta", estimate.beta}, {"gamma", estimate.gamma}};
  const auto body = ordered_json::parse(r.to_json());
  for (const auto& [k, v] : body.items()) j[k] = v;
  return finish("mitigate", j);
}

Report calibrate(const ExperimentConfig& cfg) {
  const auto r = spincim::calibrate(FailureTargets{}, cfg.device.levels, cfg.sense.i_ref_and);
  auto levels = cfg.device.levels;
  levels.sigma = r.sigma;
  auto j = header("calibrate", cfg);
  j["sigma_uA"] = r.sigma;
  j["collapse"] = {{"a", r.collapse.a}, {"b", r.collapse.b}};
  j["residual_rms"] = r.residual;
  auto fitted = ordered_json::array();
  for (double t : {20.0, 50.0, 100.0}) {
    const auto dist = attack::thermal_disturbance(levels, r.collapse, t);
    fitted.push_back({{"temperature_C", t},
                      {"rho", dist.collapse_probability(levels.ambient_temp)},
                      {"AP,AP", pair_exceedance(kPairApAp, levels, dist, cfg.sense.i_ref_and)},
                      {"AP,P", pair_exceedance(kPairApP, levels, dist, cfg.sense.i_ref_and)}});
  }
  j["fitted_rates"] = fitted;
  return finish("calibrate", j);
}

void write_report(const Report& report, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
  const auto put = [&](const std::string& name, const std::string& body) {
    const auto path = std::filesystem::path(dir) / name;
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << body)) throw IoError("cannot write '" + path.string() + "'");
  };
  put(report.name + ".json", report.json);
  for (const auto& [name, body] : report.files) put(name, body);
}

}  // namespace spincim::cli
