#include "spincim/cost_model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include "spincim/errors.hpp"
#include "spincim/format.hpp"

namespace spincim {

std::string_view to_string(CostClass c) {
  switch (c) {
    case CostClass::Read1:
      return "Read1";
    case CostClass::Read0:
      return "Read0";
    case CostClass::Write1:
      return "Write1";
    case CostClass::Write0:
      return "Write0";
    case CostClass::CimNOT:
      return "CimNOT";
    case CostClass::CimAND:
      return "CimAND";
    case CostClass::CimOR:
      return "CimOR";
    case CostClass::CimNAND:
      return "CimNAND";
    case CostClass::CimNOR:
      return "CimNOR";
    case CostClass::CimXOR:
      return "CimXOR";
    case CostClass::CimADD:
      return "CimADD";
  }
  return "?";
}

std::optional<CostClass> parse_cost_class(std::string_view name) {
  for (CostClass c : kEnhancedClasses) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

std::string_view to_string(TableVariant v) { return v == TableVariant::Standard ? "standard" : "enhanced"; }

std::string_view to_string(CostMode m) { return m == CostMode::PerWord ? "per-word" : "per-bit-writes"; }

std::string_view to_string(Channel c) { return c == Channel::Bus ? "Bus" : "InMemory"; }

DataContext DataContext::of(std::uint64_t bits, std::size_t width) {
  const std::uint64_t mask = width >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << width) - 1);
  const auto ones = static_cast<std::size_t>(std::popcount(bits & mask));
  return {ones, width - ones};
}

CostTable CostTable::defaults() {
  CostTable t;
  t.standard = {
      {CostClass::Read1, {0.6, 8.611}},
      {CostClass::Read0, {0.6, 7.669}},
      {CostClass::Write1, {4.4, 233.3}},
      {CostClass::Write0, {3.3, 191.4}},
  };
  t.enhanced = {
      {CostClass::Read1, {0.63, 22.69}},  {CostClass::Read0, {0.67, 23.85}},
      {CostClass::Write1, {4.40, 244.64}}, {CostClass::Write0, {3.30, 202.70}},
      {CostClass::CimNOT, {0.60, 22.20}},  {CostClass::CimAND, {0.55, 22.30}},
      {CostClass::CimOR, {0.53, 22.90}},   {CostClass::CimNAND, {0.45, 18.89}},
      {CostClass::CimNOR, {0.45, 21.00}},  {CostClass::CimXOR, {0.53, 26.34}},
      {CostClass::CimADD, {0.53, 26.32}},
  };
  return t;
}

void CostTable::validate() const {
  for (const auto* rows : {&standard, &enhanced}) {
    for (const auto& [cls, cost] : *rows) {
      if (!(cost.delay_ns >= 0.0 && cost.energy_fj >= 0.0)) {
        throw ConfigError("cost table: negative cost for " + std::string(to_string(cls)));
      }
    }
  }
}

CostClass classify(OpKind op, const DataContext& data) {
  switch (op) {
    case OpKind::Read:
      return data.majority_one() ? CostClass::Read1 : CostClass::Read0;
    case OpKind::Write:
      return data.majority_one() ? CostClass::Write1 : CostClass::Write0;
    case OpKind::CimNOT:
      return CostClass::CimNOT;
    case OpKind::CimAND:
      return CostClass::CimAND;
    case OpKind::CimOR:
      return CostClass::CimOR;
    case OpKind::CimNAND:
      return CostClass::CimNAND;
    case OpKind::CimNOR:
      return CostClass::CimNOR;
    case OpKind::CimXOR:
      return CostClass::CimXOR;
    case OpKind::CimADD:
      return CostClass::CimADD;
  }
  throw UnknownOp("classify: unknown op");
}

namespace {

const OpCost& lookup(const std::map<CostClass, OpCost>& rows, CostClass cls, TableVariant variant) {
  const auto it = rows.find(cls);
  if (it == rows.end()) {
    throw UnknownOp(std::string(to_string(cls)) + " has no row in the " + std::string(to_string(variant)) +
                    " cost table");
  }
  return it->second;
}

}  // namespace

OpCost cost_of(OpKind op, const DataContext& data, const CostTable& table, TableVariant variant) {
  const auto& rows = table.rows(variant);
  if (op == OpKind::Write && table.mode == CostMode::PerBitWrites) {
    OpCost total;
    if (data.ones > 0) {
      const auto& w1 = lookup(rows, CostClass::Write1, variant);
      total.energy_fj += static_cast<double>(data.ones) * w1.energy_fj;
      total.delay_ns = std::max(total.delay_ns, w1.delay_ns);
    }
    if (data.zeros > 0) {
      const auto& w0 = lookup(rows, CostClass::Write0, variant);
      total.energy_fj += static_cast<double>(data.zeros) * w0.energy_fj;
      total.delay_ns = std::max(total.delay_ns, w0.delay_ns);
    }
    return total;
  }
  return lookup(rows, classify(op, data), variant);
}

const TraceEvent& ExecutionTrace::append(CostClass kind, const DataContext& data, const OpCost& cost,
                                         Channel channel) {
  TraceEvent e;
  e.kind = kind;
  e.data = data;
  e.start_ns = end_ns();
  e.duration_ns = cost.delay_ns;
  e.energy_fj = cost.energy_fj;
  e.channel = channel;
  events_.push_back(e);
  return events_.back();
}

double ExecutionTrace::total_energy_fj() const {
  double s = 0.0;
  for (const auto& e : events_) s += e.energy_fj;
  return s;
}

double ExecutionTrace::total_delay_ns() const {
  double s = 0.0;
  for (const auto& e : events_) s += e.duration_ns;
  return s;
}

void ExecutionTrace::extend(const ExecutionTrace& other) {
  for (const auto& e : other.events_) {
    append(e.kind, e.data, {e.duration_ns, e.energy_fj}, e.channel);
  }
}

std::string ExecutionTrace::to_csv() const {
  std::ostringstream out;
  out << "kind,start_ns,duration_ns,energy_fJ,channel\n";
  for (const auto& e : events_) {
    out << to_string(e.kind) << ',' << format_double(e.start_ns) << ',' << format_double(e.duration_ns) << ','
        << format_double(e.energy_fj) << ',' << to_string(e.channel) << '\n';
  }
  return out.str();
}

ExecutionTrace ExecutionTrace::from_csv(std::string_view text) {
  ExecutionTrace trace;
  std::size_t line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (line_no == 1 && line.starts_with("kind,")) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 5) throw MalformedTrace("trace csv line " + std::to_string(line_no) + ": expected 5 fields");
    TraceEvent e;
    const auto kind = parse_cost_class(fields[0]);
    const auto start = parse_double(fields[1]);
    const auto duration = parse_double(fields[2]);
    const auto energy = parse_double(fields[3]);
    if (!kind || !start || !duration || !energy) {
      throw MalformedTrace("trace csv line " + std::to_string(line_no) + ": bad field");
    }
    if (fields[4] == "Bus") {
      e.channel = Channel::Bus;
    } else if (fields[4] == "InMemory") {
      e.channel = Channel::InMemory;
    } else {
      throw MalformedTrace("trace csv line " + std::to_string(line_no) + ": bad channel");
    }
    e.kind = *kind;
    e.start_ns = *start;
    e.duration_ns = *duration;
    e.energy_fj = *energy;
    if (!trace.events_.empty() && e.start_ns < trace.end_ns() - 1e-9) {
      throw MalformedTrace("trace csv line " + std::to_string(line_no) + ": overlapping events");
    }
    trace.events_.push_back(e);
  }
  return trace;
}

std::size_t count_bus_transfers(const ExecutionTrace& trace) {
  return static_cast<std::size_t>(std::count_if(trace.events().begin(), trace.events().end(),
                                                 [](const TraceEvent& e) { return e.channel == Channel::Bus; }));
}

std::size_t count_memory_accesses(const ExecutionTrace& trace) { return trace.size(); }

double PowerTrace::integral() const {
  double s = 0.0;
  for (double p : power) s += p * sample_period_ns;
  return s;
}

double PowerTrace::integral(double t0_ns, double t1_ns) const {
  double s = 0.0;
  for (std::size_t i = 0; i < power.size(); ++i) {
    const double lo = std::max(t0_ns, static_cast<double>(i) * sample_period_ns);
    const double hi = std::min(t1_ns, static_cast<double>(i + 1) * sample_period_ns);
    if (hi > lo) s += power[i] * (hi - lo);
  }
  return s;
}

std::string PowerTrace::to_csv() const {
  std::ostringstream out;
  out << "t_ns,power\n";
  for (std::size_t i = 0; i < power.size(); ++i) {
    out << format_double(static_cast<double>(i) * sample_period_ns) << ',' << format_double(power[i]) << '\n';
  }
  return out.str();
}

PowerTrace synthesize_power_trace(const ExecutionTrace& trace, double sample_rate_per_ns, double noise_sigma,
                                  RandomStream& rng, double window_ns) {
  if (!(sample_rate_per_ns > 0.0)) throw ConfigError("synthesize_power_trace: sample_rate must be > 0");
  PowerTrace out;
  out.sample_period_ns = 1.0 / sample_rate_per_ns;
  const double period = out.sample_period_ns;
  const auto samples = static_cast<std::size_t>(std::ceil(std::max(trace.end_ns(), window_ns) / period - 1e-9));
  std::vector<double> energy(samples, 0.0);
  for (const auto& e : trace.events()) {
    if (e.duration_ns <= 0.0) {
      if (e.energy_fj != 0.0 && samples > 0) {
        const auto bin = std::min(samples - 1, static_cast<std::size_t>(e.start_ns / period));
        energy[bin] += e.energy_fj;
      }
      continue;
    }
    const double p = e.energy_fj / e.duration_ns;
    const double end = e.start_ns + e.duration_ns;
    auto bin = static_cast<std::size_t>(e.start_ns / period);
    for (; bin < samples; ++bin) {
      const double lo = std::max(e.start_ns, static_cast<double>(bin) * period);
      const double hi = std::min(end, static_cast<double>(bin + 1) * period);
      if (hi <= lo) {
        if (static_cast<double>(bin) * period >= end) break;
        continue;
      }
      energy[bin] += p * (hi - lo);
    }
  }
  out.power.resize(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    const double noise = noise_sigma > 0.0 ? noise_sigma * rng.normal() : 0.0;
    out.power[i] = (energy[i] + noise) / period;
  }
  return out;
}

}  // namespace spincim
