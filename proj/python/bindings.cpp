#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "spincim/attack_lab.hpp"
#include "spincim/config.hpp"
#include "spincim/errors.hpp"
#include "spincim/isa.hpp"
#include "spincim/mitigation.hpp"
#include "spincim/sca.hpp"

namespace py = pybind11;
using namespace spincim;

namespace {

OpKind op_from(const std::string& name) {
  const auto op = parse_op_kind(name);
  if (!op) throw UnknownOp("unknown op '" + name + "'");
  return *op;
}

py::dict report_dict(const attack::McReport& r) {
  py::dict d;
  d["trials"] = r.trials;
  d["failures"] = r.failures;
  d["rate"] = r.rate;
  d["ci95"] = py::make_tuple(r.wilson_95_ci.lo, r.wilson_95_ci.hi);
  d["analytic_rate"] = r.analytic_rate;
  d["analytic_stderr"] = r.analytic_stderr;
  d["agrees_with_oracle"] = r.agrees_with_oracle();
  return d;
}

py::dict stats_dict(const isa::ExecStats& s) {
  py::dict d;
  d["instruction_count"] = s.instruction_count;
  d["memory_access_count"] = s.memory_access_count;
  d["bus_transfers"] = s.bus_transfers;
  d["in_memory_ops"] = s.in_memory_ops;
  d["total_delay_ns"] = s.total_delay_ns;
  d["total_energy_fj"] = s.total_energy_fj;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Behavioural model of a spin-based computing-in-memory array";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<InvalidShift>(m, "InvalidShift", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<MappingViolation>(m, "MappingViolation", base.ptr());
  py::register_exception<UnknownOp>(m, "UnknownOp", base.ptr());

  py::class_<CurrentLevelModel>(m, "CurrentLevelModel")
      .def(py::init<>())
      .def_readwrite("i_ap", &CurrentLevelModel::i_ap)
      .def_readwrite("i_p", &CurrentLevelModel::i_p)
      .def_readwrite("i_apap", &CurrentLevelModel::i_apap)
      .def_readwrite("i_app", &CurrentLevelModel::i_app)
      .def_readwrite("i_pp", &CurrentLevelModel::i_pp)
      .def_readwrite("sigma", &CurrentLevelModel::sigma)
      .def_readwrite("ambient_temp", &CurrentLevelModel::ambient_temp)
      .def("read_margin", &CurrentLevelModel::read_margin)
      .def("low_pair_margin", &CurrentLevelModel::low_pair_margin)
      .def("high_pair_margin", &CurrentLevelModel::high_pair_margin)
      .def("validate", &CurrentLevelModel::validate);

  py::class_<SenseConfig>(m, "SenseConfig")
      .def(py::init<>())
      .def_readwrite("i_ref_read", &SenseConfig::i_ref_read)
      .def_readwrite("i_ref_or", &SenseConfig::i_ref_or)
      .def_readwrite("i_ref_and", &SenseConfig::i_ref_and)
      .def_static("midpoints", &SenseConfig::midpoints);

  py::class_<Collapse>(m, "Collapse")
      .def(py::init<>())
      .def_readwrite("a", &Collapse::a)
      .def_readwrite("b", &Collapse::b);

  m.def(
      "collapse_probability",
      [](double temp, const CurrentLevelModel& levels, const Collapse& c) {
        return attack::thermal_disturbance(levels, c, temp).collapse_probability(levels.ambient_temp);
      },
      py::arg("temp"), py::arg("levels") = CurrentLevelModel{}, py::arg("collapse") = Collapse{});

  m.def(
      "analytic_decode_failure",
      [](const std::string& pair, const std::string& op, double temp, const CurrentLevelModel& levels,
         const SenseConfig& sense, const Collapse& c) {
        return attack::analytic_decode_failure(parse_pair(pair), op_from(op),
                                               attack::thermal_disturbance(levels, c, temp), sense, levels);
      },
      py::arg("pair"), py::arg("op") = "CimAND", py::arg("temp") = 20.0, py::arg("levels") = CurrentLevelModel{},
      py::arg("sense") = SenseConfig{}, py::arg("collapse") = Collapse{});

  m.def(
      "mc_decode_failure",
      [](const std::string& pair, const std::string& op, double temp, std::uint64_t trials, std::uint64_t seed,
         unsigned threads, const CurrentLevelModel& levels, const SenseConfig& sense, const Collapse& c) {
        const auto dist = attack::thermal_disturbance(levels, c, temp);
        attack::McReport r;
        {
          py::gil_scoped_release release;
          r = attack::mc_decode_failure(parse_pair(pair), op_from(op), dist, sense, levels, trials, seed, threads);
        }
        return report_dict(r);
      },
      py::arg("pair"), py::arg("op") = "CimAND", py::arg("temp") = 20.0, py::arg("trials") = 10000,
      py::arg("seed") = 1, py::arg("threads") = 1, py::arg("levels") = CurrentLevelModel{},
      py::arg("sense") = SenseConfig{}, py::arg("collapse") = Collapse{});

  m.def(
      "adapt_references",
      [](double alpha, double beta, double gamma, const SenseConfig& sense, const CurrentLevelModel& levels) {
        return mitigation::adapt_references(sense, levels, mitigation::ShiftEstimate{alpha, beta, gamma});
      },
      py::arg("alpha"), py::arg("beta"), py::arg("gamma"), py::arg("sense") = SenseConfig{},
      py::arg("levels") = CurrentLevelModel{});

  m.def(
      "run_program",
      [](const std::string& source, bool lowered) {
        auto program = isa::assemble(source);
        if (lowered) program = isa::lower_to_conventional(program);
        ArraySetup setup;
        setup.levels.sigma = 0.0;
        isa::Machine machine(setup);
        return stats_dict(isa::run(program, machine).stats);
      },
      py::arg("source"), py::arg("lowered") = false,
      "Assemble and run at zero noise; returns execution statistics.");

  m.def(
      "classification_accuracy",
      [](bool enhanced, std::size_t per_class, double sigma_energy_fj, double sigma_duration_ns, std::uint64_t seed) {
        const auto table = CostTable::defaults();
        const sca::ObservationNoise noise{sigma_duration_ns, sigma_energy_fj};
        py::gil_scoped_release release;
        return enhanced ? sca::classification_experiment(kEnhancedClasses, table.enhanced, per_class, noise, seed).accuracy
                        : sca::classification_experiment(kStandardClasses, table.standard, per_class, noise, seed).accuracy;
      },
      py::arg("enhanced"), py::arg("per_class") = 1000, py::arg("sigma_energy_fj") = 0.0,
      py::arg("sigma_duration_ns") = 0.0, py::arg("seed") = 1);

  m.def(
      "config_hash", [](const std::string& json) { return ExperimentConfig::from_json(json).hash(); },
      py::arg("json") = "{}");
  m.def("default_config", [] { return ExperimentConfig{}.to_json(); });
}
