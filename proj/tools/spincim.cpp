#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "spincim/errors.hpp"

using namespace spincim;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitExperiment = 2;

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trials;
  std::optional<unsigned> threads;
  std::string out;
};

ExperimentConfig load_config(const Common& c) {
  auto cfg = c.config_path.empty() ? ExperimentConfig{} : ExperimentConfig::load(c.config_path);
  if (c.seed) cfg.seed = *c.seed;
  if (c.trials) cfg.trials = *c.trials;
  if (c.threads) cfg.threads = *c.threads;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Behavioural security simulator for spin-based computing-in-memory"};
  app.require_subcommand(1);
  app.fallthrough();

  Common common;
  app.add_option("--config", common.config_path, "JSON experiment config")->check(CLI::ExistingFile);
  app.add_option("--seed", common.seed, "Master seed");
  app.add_option("--trials", common.trials, "Monte Carlo trials")->check(CLI::PositiveNumber);
  app.add_option("--threads", common.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", common.out, "Directory for report files");

  auto* margins = app.add_subcommand("margins", "Sense margins between adjacent current levels");

  auto* truth = app.add_subcommand("truth-table", "Decoded outputs for every input combination");
  std::string tt_op;
  std::optional<double> tt_noise;
  truth->add_option("--op", tt_op, "Operation (default: all)");
  truth->add_option("--noise", tt_noise, "Sense noise sigma in uA (overrides config)")->check(CLI::NonNegativeNumber);

  auto* mc = app.add_subcommand("mc-failure", "Monte Carlo decode failure rate in a heated zone");
  std::optional<double> mc_temp;
  std::string mc_pair, mc_op = "CimAND";
  bool mc_table = false;
  mc->add_option("--temp", mc_temp, "Zone temperature in C");
  mc->add_option("--pair", mc_pair, "Cell pair: AP,AP | AP,P | P,P");
  mc->add_option("--op", mc_op, "Sensed operation");
  mc->add_flag("--table", mc_table, "Every pair and temperature of the failure table");

  auto* auth = app.add_subcommand("auth-attack", "Bypass rate of the in-memory authentication check");
  std::string auth_variant, auth_policy;
  std::optional<double> auth_temp;
  bool auth_forced = false;
  auth->add_option("--variant", auth_variant, "none | gate | xnor");
  auth->add_option("--policy", auth_policy, "correct | correct-user-random-password | correct-user-near-miss | random");
  auth->add_option("--temp", auth_temp, "Zone temperature in C");
  auth->add_flag("--forced", auth_forced, "Deterministic forced flip instead of thermal collapse");

  auto* isa_cmd = app.add_subcommand("isa-run", "Assemble and run a program");
  cli::IsaRunArgs isa_args;
  isa_cmd->add_option("--program", isa_args.program_path, "Assembly source")->required()->check(CLI::ExistingFile);
  isa_cmd->add_option("--memory", isa_args.memory_path, "Initial memory hex dump");
  isa_cmd->add_flag("--compare-lowered", isa_args.compare_lowered, "Also run the conventional lowering");
  isa_cmd->add_option("--noise", isa_args.noise, "Sense noise sigma in uA (overrides config)")
      ->check(CLI::NonNegativeNumber);

  auto* sca_cmd = app.add_subcommand("sca", "Operation classification, Hamming weight and obscuring experiments");
  auto* mit = app.add_subcommand("mitigate", "Failure rates before and after reference adaptation");
  std::string mit_dist;
  mit->add_option("--disturbance", mit_dist, "none | mean-shift | collapse");
  auto* cal = app.add_subcommand("calibrate", "Fit sigma and the collapse law to the failure table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    auto cfg = load_config(common);
    if (!common.config_path.empty() && common.out.empty()) common.out = cfg.output_dir;

    cli::Report report;
    if (margins->parsed()) {
      report = cli::margins(cfg);
    } else if (truth->parsed()) {
      std::optional<OpKind> op;
      if (!tt_op.empty()) {
        op = parse_op_kind(tt_op);
        if (!op) throw ConfigError("unknown op '" + tt_op + "'");
      }
      report = cli::truth_table(cfg, op, tt_noise);
    } else if (mc->parsed()) {
      cli::McFailureArgs args;
      args.temp = mc_temp;
      if (!mc_pair.empty()) args.pair = parse_pair(mc_pair);
      const auto op = parse_op_kind(mc_op);
      if (!op) throw ConfigError("unknown op '" + mc_op + "'");
      args.op = *op;
      args.table = mc_table;
      report = cli::mc_failure(cfg, args);
    } else if (auth->parsed()) {
      if (!auth_variant.empty()) cfg.attack.variant = attack::parse_attack_variant(auth_variant);
      if (!auth_policy.empty()) cfg.attack.policy = attack::parse_credential_policy(auth_policy);
      if (auth_temp) cfg.attack.temperature = *auth_temp;
      if (auth_forced) cfg.attack.forced = true;
      report = cli::auth_attack(cfg);
    } else if (isa_cmd->parsed()) {
      report = cli::isa_run(cfg, isa_args);
    } else if (sca_cmd->parsed()) {
      report = cli::sca(cfg);
    } else if (mit->parsed()) {
      if (mit_dist == "none") cfg.mitigation.disturbance = MitigationDisturbance::None;
      else if (mit_dist == "mean-shift") cfg.mitigation.disturbance = MitigationDisturbance::MeanShift;
      else if (mit_dist == "collapse") cfg.mitigation.disturbance = MitigationDisturbance::Collapse;
      else if (!mit_dist.empty()) throw ConfigError("unknown disturbance '" + mit_dist + "'");
      report = cli::mitigate(cfg);
    } else if (cal->parsed()) {
      report = cli::calibrate(cfg);
    }

    std::cout << report.json;
    if (!common.out.empty()) cli::write_report(report, common.out);
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InvalidShift& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitExperiment;
  }
}
