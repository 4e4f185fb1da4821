#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spincim/ops.hpp"
#include "spincim/random.hpp"

namespace spincim {

/// Rows of the delay/energy tables: Read/Write split by data value plus the
/// seven in-memory logic operations.
enum class CostClass {
  Read1,
  Read0,
  Write1,
  Write0,
  CimNOT,
  CimAND,
  CimOR,
  CimNAND,
  CimNOR,
  CimXOR,
  CimADD,
};

inline constexpr std::array<CostClass, 4> kStandardClasses = {
    CostClass::Read1, CostClass::Read0, CostClass::Write1, CostClass::Write0};

inline constexpr std::array<CostClass, 11> kEnhancedClasses = {
    CostClass::Read1,  CostClass::Read0,   CostClass::Write1, CostClass::Write0,
    CostClass::CimNOT, CostClass::CimAND,  CostClass::CimOR,  CostClass::CimNAND,
    CostClass::CimNOR, CostClass::CimXOR,  CostClass::CimADD};

std::string_view to_string(CostClass c);
std::optional<CostClass> parse_cost_class(std::string_view name);

enum class TableVariant { Standard, Enhanced };
enum class CostMode { PerWord, PerBitWrites };

std::string_view to_string(TableVariant v);
std::string_view to_string(CostMode m);

struct OpCost {
  double delay_ns = 0.0;
  double energy_fj = 0.0;
};

/// Bit counts of the data a Read/Write touches.
struct DataContext {
  std::size_t ones = 0;
  std::size_t zeros = 0;

  static DataContext of(std::uint64_t bits, std::size_t width);
  /// Majority value of the word, ties counted as `1`.
  bool majority_one() const { return ones >= zeros; }
};

struct CostTable {
  std::map<CostClass, OpCost> standard;
  std::map<CostClass, OpCost> enhanced;
  CostMode mode = CostMode::PerWord;

  /// Values of the standard and enhanced STT-MRAM delay/energy tables.
  static CostTable defaults();

  const std::map<CostClass, OpCost>& rows(TableVariant v) const {
    return v == TableVariant::Standard ? standard : enhanced;
  }
  void validate() const;
};

/// Which table row a word-level op is charged against.
CostClass classify(OpKind op, const DataContext& data);

/// Cost of one word-level op. In PerBitWrites mode a Write is charged per bit
/// with the delay of the slowest bit (bit-lines switch in parallel).
OpCost cost_of(OpKind op, const DataContext& data, const CostTable& table, TableVariant variant);

enum class Channel { Bus, InMemory };
std::string_view to_string(Channel c);

struct TraceEvent {
  CostClass kind = CostClass::Read0;
  DataContext data;
  double start_ns = 0.0;
  double duration_ns = 0.0;
  double energy_fj = 0.0;
  Channel channel = Channel::InMemory;
};

/// Append-only, non-overlapping record of array operations.
class ExecutionTrace {
 public:
  /// Starts the event where the previous one ended.
  const TraceEvent& append(CostClass kind, const DataContext& data, const OpCost& cost, Channel channel);

  const std::vector<TraceEvent>& events() const { return events_; }
  bool empty() const { return events_.empty(); }
  std::size_t size() const { return events_.size(); }
  double end_ns() const { return events_.empty() ? 0.0 : events_.back().start_ns + events_.back().duration_ns; }
  double total_energy_fj() const;
  double total_delay_ns() const;

  void clear() { events_.clear(); }
  void extend(const ExecutionTrace& other);

  /// kind,start_ns,duration_ns,energy_fJ,channel
  std::string to_csv() const;
  static ExecutionTrace from_csv(std::string_view text);

 private:
  std::vector<TraceEvent> events_;
};

std::size_t count_bus_transfers(const ExecutionTrace& trace);
/// Bus transfers plus in-memory operations.
std::size_t count_memory_accesses(const ExecutionTrace& trace);

/// Sampled power in fJ/ns (µW). Sample i averages the interval
/// [i * period, (i + 1) * period).
struct PowerTrace {
  double sample_period_ns = 1.0;
  std::vector<double> power;

  double integral() const;
  /// Energy over [t0, t1), bins partially covered are prorated.
  double integral(double t0_ns, double t1_ns) const;
  /// t_ns,power
  std::string to_csv() const;
};

/// noise_sigma is the standard deviation of the energy in one sample (fJ).
/// The trace covers at least `window_ns`, so an empty trace still yields
/// (noise-only) samples when a window is given.
PowerTrace synthesize_power_trace(const ExecutionTrace& trace, double sample_rate_per_ns, double noise_sigma,
                                  RandomStream& rng, double window_ns = 0.0);

}  // namespace spincim
