// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "commands.hpp"
#include "program_gen.hpp"
#include "spincim/attack_lab.hpp"
#include "spincim/isa.hpp"
#include "spincim/mitigation.hpp"
#include "spincim/sca.hpp"

using namespace spincim;
using Clock = std::chrono::steady_clock;

namespace {

constexpr std::uint64_t kSeed = 1;
int failures = 0;

void report(int id, const char* title, bool ok, const std::string& detail) {
  std::printf("%s  %2d  %s: %s\n", ok ? "PASS" : "FAIL", id, title, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

ArraySetup quiet(std::size_t cols = 16) {
  ArraySetup s;
  s.geometry.cols_per_row = cols;
  s.levels.sigma = 0.0;
  return s;
}

void failure_table() {
  const auto t0 = Clock::now();
  const CurrentLevelModel levels;
  const SenseConfig sense;
  const auto rate = [&](CellPair p, double temp) {
    return attack::mc_failure_rate(p, temp, 10000, kSeed, levels, Collapse{}, sense);
  };
  const auto app20 = rate(kPairApP, 20), app50 = rate(kPairApP, 50), app100 = rate(kPairApP, 100);
  const auto apap20 = rate(kPairApAp, 20), apap50 = rate(kPairApAp, 50), apap100 = rate(kPairApAp, 100);
  const double elapsed = seconds_since(t0);
  const bool ok = std::abs(app20.rate - 0.005) <= 0.002 && std::abs(app50.rate - 0.006) <= 0.003 &&
                  std::abs(app100.rate - 0.044) <= 0.006 && std::abs(apap100.rate - 0.003) <= 0.002 &&
                  apap20.failures == 0 && apap50.failures == 0 && elapsed < 10.0;
  std::ostringstream d;
  d << "AP,P " << app20.rate << " / " << app50.rate << " / " << app100.rate << ", AP,AP " << apap20.failures << " / "
    << apap50.failures << " failures / " << apap100.rate << " (analytic AP,AP@100 " << apap100.analytic_rate << "), "
    << fmt("%.2f s", elapsed);
  report(1, "failure table", ok, d.str());
}

void oracle_matrix() {
  const CurrentLevelModel levels;
  const SenseConfig sense;
  int cells = 0, agree = 0;
  std::string worst;
  double worst_z = 0.0;
  for (double temp : {20.0, 50.0, 100.0}) {
    const auto dist = attack::thermal_disturbance(levels, Collapse{}, temp);
    for (auto pair : {kPairApAp, kPairApP, kPairPP}) {
      for (auto op : {OpKind::CimAND, OpKind::CimOR}) {
        const auto r = attack::mc_decode_failure(pair, op, dist, sense, levels, 20000, kSeed + cells);
        ++cells;
        agree += r.agrees_with_oracle();
        const double z = r.analytic_stderr > 0 ? std::abs(r.rate - r.analytic_rate) / r.analytic_stderr : 0.0;
        if (z >= worst_z) {
          worst_z = z;
          worst = std::string(pair_name(pair)) + " " + std::string(to_string(op)) + " @" + fmt("%g", temp);
        }
      }
    }
  }
  report(2, "oracle equivalence", cells >= 12 && agree == cells,
         std::to_string(agree) + "/" + std::to_string(cells) + " cells within 3 stderr, largest |z| " +
             fmt("%.2f", worst_z) + " at " + worst);
}

void margins() {
  const auto j = nlohmann::json::parse(cli::margins(ExperimentConfig{}).json);
  const double r = j.at("read_margin_uA"), o = j.at("or_margin_uA"), a = j.at("and_margin_uA");
  report(3, "margins", r == 5.5 && o == 3.2 && a == 2.5, fmt("%.15g / %.15g / %.15g uA", r, o, a));
}

void functional_suite() {
  const auto t0 = Clock::now();
  bool truth = true, demorgan = true, add = true, xnor = true;
  const RowAddress A{0, 0}, B{0, 1}, D{0, 2}, E{0, 3};

  CimArray t(quiet(4));
  t.write_word(A, Word(0b1010, 4));
  t.write_word(B, Word(0b1100, 4));
  truth &= t.cim_two_row(OpKind::CimAND, A, B).bits() == 0b1000;
  truth &= t.cim_two_row(OpKind::CimOR, A, B).bits() == 0b1110;
  truth &= t.cim_two_row(OpKind::CimNAND, A, B).bits() == 0b0111;
  truth &= t.cim_two_row(OpKind::CimNOR, A, B).bits() == 0b0001;
  truth &= t.cim_two_row(OpKind::CimXOR, A, B).bits() == 0b0110;
  truth &= t.cim_not(A).bits() == 0b0101;
  truth &= t.read_word(A).bits() == 0b1010;

  CimArray w(quiet());
  RandomStream rng(kSeed);
  for (int i = 0; i < 1000; ++i) {
    const Word a(rng.bits(), 16), b(rng.bits(), 16);
    w.write_word(A, a);
    w.write_word(B, b);
    w.cim_not(A, D);
    w.cim_not(B, E);
    demorgan &= w.cim_two_row(OpKind::CimNAND, A, B) == w.cim_two_row(OpKind::CimOR, D, E);
    demorgan &= w.cim_two_row(OpKind::CimNOR, A, B) == w.cim_two_row(OpKind::CimAND, D, E);
    w.write_word(B, a);
    xnor &= w.cim_xnor(A, B, D, E).all_ones();
    w.take_trace();
  }

  CimArray s(quiet(8));
  for (std::uint64_t a = 0; a < 256; ++a) {
    s.write_word(A, Word(a, 8));
    for (std::uint64_t b = 0; b < 256; ++b) {
      s.write_word(B, Word(b, 8));
      const bool carry = s.cim_add(A, B, D);
      add &= s.peek(D).bits() + (carry ? 256u : 0u) == a + b;
    }
    s.take_trace();
  }
  const double elapsed = seconds_since(t0);
  std::ostringstream d;
  d << "truth tables " << (truth ? "exact" : "WRONG") << ", De Morgan " << (demorgan ? "exact" : "WRONG")
    << ", 65536 8-bit CimADD " << (add ? "exact" : "WRONG") << ", 1000 XNOR(x,x) " << (xnor ? "all ones" : "WRONG")
    << ", " << fmt("%.2f s", elapsed);
  report(4, "zero-noise functional suite", truth && demorgan && add && xnor && elapsed < 30.0, d.str());
}

void direct_vs_conventional() {
  std::ifstream in(std::string(SPINCIM_PROGRAMS_DIR) + "/add.cim");
  std::stringstream src;
  src << in.rdbuf();
  const auto program = isa::assemble(src.str());
  isa::Machine direct(quiet()), conv(quiet());
  const auto d = isa::run(program, direct).stats;
  const auto c = isa::run(isa::lower_to_conventional(program), conv).stats;
  bool counts = d.instruction_count == 1 && d.memory_access_count == 1 && c.instruction_count == 4 &&
                c.memory_access_count == 3;

  int equivalent = 0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    auto rng = RandomStream::for_trial(kSeed, trial);
    const auto p = isa::assemble(testing::random_program(rng, 1 + rng.bits() % 40));
    const auto mem_seed = rng.bits();
    isa::Machine m1(quiet()), m2(quiet());
    RandomStream r1(mem_seed), r2(mem_seed);
    testing::randomize_memory(m1, r1);
    testing::randomize_memory(m2, r2);
    isa::run(p, m1);
    isa::run(isa::lower_to_conventional(p), m2);
    bool same = m1.array.export_hex() == m2.array.export_hex();
    for (std::size_t r = 0; r < isa::kLoweringTempA; ++r) same &= m1.regs[r] == m2.regs[r];
    equivalent += same;
  }
  std::ostringstream det;
  det << "conventional " << c.instruction_count << " instr / " << c.memory_access_count << " accesses, CimADD "
      << d.instruction_count << " / " << d.memory_access_count << ", differential " << equivalent << "/100";
  report(5, "direct vs conventional add", counts && equivalent == 100, det.str());
}

void attack_algebra() {
  const CurrentLevelModel levels;
  const SenseConfig sense;
  const auto xnor = attack::AttackScenario::forced(attack::AttackVariant::XnorLevel, levels, sense);
  const auto gate = attack::AttackScenario::forced(attack::AttackVariant::GateLevel, levels, sense);
  RandomStream rng(kSeed);
  int accepted = 0;
  const int n = 1000;
  for (int i = 0; i < n; ++i) {
    const auto db = attack::random_db(16, rng);
    const auto typed = attack::draw_credentials(db, attack::CredentialPolicy::Random, rng);
    accepted += attack::run_auth(db, typed, xnor, quiet(), rng).accept;
  }
  bool gate_ok = true;
  for (int i = 0; i < 50; ++i) {
    const auto db = attack::random_db(16, rng);
    const auto& stored = db.entries[0];
    for (bool u : {false, true}) {
      for (bool p : {false, true}) {
        attack::Credentials typed{u ? stored.username : Word(~stored.username.bits(), 16),
                                  p ? stored.password : Word(stored.password.bits() ^ 1, 16)};
        gate_ok &= attack::run_auth(db, typed, gate, quiet(), rng).accept == (u || p);
      }
    }
  }
  report(6, "attack algebra", accepted == n && gate_ok,
         "XNOR-level accepted " + std::to_string(accepted) + "/" + std::to_string(n) +
             " random credentials, gate-level accept == (user OR pass) " + (gate_ok ? "on all" : "NOT on all") +
             " 4 combinations x 50 databases");
}

void probabilistic_attack() {
  const ArraySetup setup;
  RandomStream rng(kSeed);
  const auto db = attack::random_db(16, rng);
  const auto gate = attack::AttackScenario::thermal(attack::AttackVariant::GateLevel, setup.levels, Collapse{}, 100);
  const auto xnor = attack::AttackScenario::thermal(attack::AttackVariant::XnorLevel, setup.levels, Collapse{}, 100);
  const auto r1 =
      attack::attack_success_rate(db, attack::CredentialPolicy::CorrectUserRandomPassword, gate, setup, 10000, kSeed);
  const auto r2 =
      attack::attack_success_rate(db, attack::CredentialPolicy::CorrectUserNearMiss, xnor, setup, 10000, kSeed);
  report(7, "probabilistic attack @100 C", r1.agrees_with_oracle() && r2.agrees_with_oracle(),
         fmt("gate/random-password %.4f vs analytic %.4f, xnor/near-miss %.4f vs analytic %.4f", r1.rate,
             r1.analytic_rate, r2.rate, r2.analytic_rate));
}

void sca_claim() {
  const auto table = CostTable::defaults();
  bool ordered = true;
  std::ostringstream d;
  const auto zero4 = sca::classification_experiment(kStandardClasses, table.standard, 10000, {}, kSeed);
  const auto zero11 = sca::classification_experiment(kEnhancedClasses, table.enhanced, 10000, {}, kSeed);
  d << "zero noise " << zero4.accuracy << " / " << zero11.accuracy;
  for (double se : {0.5, 1.0, 2.0, 5.0}) {
    const sca::ObservationNoise noise{0.05, se};
    const auto c4 = sca::classification_experiment(kStandardClasses, table.standard, 10000, noise, kSeed);
    const auto c11 = sca::classification_experiment(kEnhancedClasses, table.enhanced, 10000, noise, kSeed);
    ordered &= c11.accuracy <= c4.accuracy;
    d << fmt("; sE=%g: 4-class %.4f, 11-class %.4f", se, c4.accuracy, c11.accuracy);
  }
  auto bitwise = table;
  bitwise.mode = CostMode::PerBitWrites;
  bool hw = true;
  for (std::uint64_t w = 0; w < 4096; ++w) {
    const auto ctx = DataContext::of(w, 12);
    ExecutionTrace tr;
    tr.append(CostClass::Write1, ctx, cost_of(OpKind::Write, ctx, bitwise, TableVariant::Standard), Channel::Bus);
    hw &= sca::hamming_weight_attack(tr, 12, bitwise, TableVariant::Standard) == ctx.ones;
  }
  d << "; HW exact on all 4096 12-bit words: " << (hw ? "yes" : "no");
  report(8, "side-channel comparison", ordered && zero4.accuracy == 1.0 && zero11.accuracy == 1.0 && hw, d.str());
}

void mitigation_check() {
  const CurrentLevelModel levels;
  const SenseConfig base;
  const mitigation::ShiftEstimate shift;  // 0.2, 0.4, 0.6
  const auto adapted = mitigation::adapt_references(base, levels, shift);
  const std::uint64_t n = 10000;

  const auto ms = mitigation::evaluate_mitigation(DisturbanceModel::mean_shift(shift.as_mean_shift()), adapted, base,
                                                  levels, n, kSeed);
  const auto& m = ms.cell(kPairApP, OpKind::CimAND);
  const double band = 3.0 * std::sqrt(m.natural_rate * (1 - m.natural_rate) / static_cast<double>(n));
  const bool restored = std::abs(m.after.rate - m.natural_rate) <= band;

  const auto hot = attack::thermal_disturbance(levels, Collapse{}, 100.0);
  const auto cs = mitigation::evaluate_mitigation(hot, adapted, base, levels, n, kSeed);
  const auto& c = cs.cell(kPairApP, OpKind::CimAND);
  const bool helps = c.after.rate < c.before.rate;

  report(9, "mitigation", restored && helps,
         fmt("mean shift: after %.4f vs natural %.4f (band +-%.4f, analytic after %.4f)", m.after.rate,
             m.natural_rate, band, m.after.analytic_rate) +
             fmt("; collapse @100: before %.4f, after %.4f", c.before.rate, c.after.rate));
}

void determinism() {
  const auto program = std::string(SPINCIM_PROGRAMS_DIR) + "/add.cim";
  const auto all = [&](unsigned threads) {
    ExperimentConfig cfg;
    cfg.trials = 5000;
    cfg.threads = threads;
    cfg.sca.per_class = 2000;
    std::vector<cli::Report> out;
    out.push_back(cli::margins(cfg));
    out.push_back(cli::truth_table(cfg, std::nullopt, std::nullopt));
    cli::McFailureArgs mc;
    mc.table = true;
    out.push_back(cli::mc_failure(cfg, mc));
    out.push_back(cli::auth_attack(cfg));
    cli::IsaRunArgs isa_args;
    isa_args.program_path = program;
    isa_args.compare_lowered = true;
    out.push_back(cli::isa_run(cfg, isa_args));
    out.push_back(cli::sca(cfg));
    cfg.mitigation.disturbance = MitigationDisturbance::Collapse;
    out.push_back(cli::mitigate(cfg));
    out.push_back(cli::calibrate(cfg));
    return out;
  };
  const auto a = all(1), b = all(1), c = all(6);
  std::size_t files = 0, identical = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++files;
    identical += a[i].json == b[i].json && a[i].json == c[i].json;
    for (std::size_t f = 0; f < a[i].files.size(); ++f) {
      ++files;
      identical += a[i].files[f] == b[i].files[f] && a[i].files[f] == c[i].files[f];
    }
  }
  report(10, "determinism", identical == files,
         std::to_string(identical) + "/" + std::to_string(files) +
             " report files byte-identical across reruns and 1 vs 6 threads (8 subcommands)");
}

}  // namespace

int main() {
  failure_table();
  oracle_matrix();
  margins();
  functional_suite();
  direct_vs_conventional();
  attack_algebra();
  probabilistic_attack();
  sca_claim();
  mitigation_check();
  determinism();
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
