#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spincim/cost_model.hpp"
#include "spincim/device_model.hpp"
#include "spincim/ops.hpp"
#include "spincim/random.hpp"

namespace spincim {

inline constexpr std::size_t kMaxWordWidth = 64;

/// Fixed-width bit vector, bit k is column k (little-endian).
class Word {
 public:
  Word() = default;
  Word(std::uint64_t bits, std::size_t width);

  static Word zeros(std::size_t width) { return Word(0, width); }
  static Word ones(std::size_t width) { return Word(~std::uint64_t{0}, width); }
  /// Parses hex digits (optional 0x prefix).
  static Word from_hex(std::string_view hex, std::size_t width);

  std::uint64_t bits() const { return bits_; }
  std::size_t width() const { return width_; }
  bool bit(std::size_t col) const { return (bits_ >> col) & 1u; }
  void set_bit(std::size_t col, bool value);
  std::size_t popcount() const;
  bool all_ones() const { return bits_ == mask(width_); }
  std::string to_hex() const;

  static std::uint64_t mask(std::size_t width) {
    return width >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << width) - 1);
  }

  friend bool operator==(const Word&, const Word&) = default;

 private:
  std::uint64_t bits_ = 0;
  std::size_t width_ = 0;
};

struct ArrayGeometry {
  std::size_t banks = 1;
  std::size_t rows_per_bank = 64;
  std::size_t cols_per_row = 16;

  void validate() const;
  friend bool operator==(const ArrayGeometry&, const ArrayGeometry&) = default;
};

struct RowAddress {
  std::size_t bank = 0;
  std::size_t row = 0;

  std::string to_string() const;
  friend auto operator<=>(const RowAddress&, const RowAddress&) = default;
};

/// Sense-amplifier references in µA.
struct SenseConfig {
  double i_ref_read = 12.75;
  double i_ref_or = 18.6;
  double i_ref_and = 21.45;

  /// References halfway between adjacent mean levels.
  static SenseConfig midpoints(const CurrentLevelModel& model);
  /// Throws ConfigError unless each reference separates its two levels.
  void validate(const CurrentLevelModel& model) const;
};

enum class DecodeKind { Threshold, InvertedThreshold, Window };

/// How a sensed current becomes an output bit: Threshold is i > lo,
/// InvertedThreshold is i <= lo, Window is lo < i <= hi.
struct DecodeRule {
  DecodeKind kind = DecodeKind::Threshold;
  double lo = 0.0;
  double hi = 0.0;

  bool apply(double current) const;
};

/// Rule used by `op` (Read, CimNOT and the two-row logic ops).
DecodeRule decode_rule(OpKind op, const SenseConfig& sense);
bool decode(OpKind op, double current, const SenseConfig& sense);

/// Heated region: senses touching any of `rows` during one of `ops` (all ops
/// when empty) see `disturbance`.
struct ThermalZone {
  DisturbanceModel disturbance;
  std::vector<RowAddress> rows;
  std::vector<OpKind> ops;

  bool affects(OpKind op, RowAddress a, std::optional<RowAddress> b = std::nullopt) const;
};

/// Succeeds iff both operands share a bank and sit on different rows.
void validate_mapping(RowAddress a, RowAddress b);

struct ArraySetup {
  ArrayGeometry geometry;
  CurrentLevelModel levels;
  SenseConfig sense;
  CostTable costs = CostTable::defaults();
  TableVariant variant = TableVariant::Enhanced;
};

/// STT-MRAM array with sense amplifiers. Writes are fault free; every sense
/// draws one current sample per column. Single owner, not thread safe.
class CimArray {
 public:
  explicit CimArray(ArraySetup setup, std::uint64_t seed = 0);

  const ArraySetup& setup() const { return setup_; }
  const ArrayGeometry& geometry() const { return setup_.geometry; }
  std::size_t width() const { return setup_.geometry.cols_per_row; }

  void write_word(RowAddress addr, const Word& data, Channel channel = Channel::Bus);
  Word read_word(RowAddress addr, Channel channel = Channel::Bus);

  /// CimAND / CimOR / CimNAND / CimNOR / CimXOR on rows a and b. With a
  /// destination the result is stored there, covered by the op's own cost.
  Word cim_two_row(OpKind op, RowAddress a, RowAddress b, std::optional<RowAddress> dest = std::nullopt,
                   Channel channel = Channel::InMemory);
  Word cim_not(RowAddress a, std::optional<RowAddress> dest = std::nullopt, Channel channel = Channel::InMemory);
  /// (a CimAND b) OR (a CimNOR b); the partial results land in the scratch
  /// rows and the final OR runs in the controller.
  Word cim_xnor(RowAddress a, RowAddress b, RowAddress scratch_and, RowAddress scratch_nor);
  /// Bit-serial ripple add into dest; returns the carry out.
  bool cim_add(RowAddress a, RowAddress b, RowAddress dest, Channel channel = Channel::InMemory);

  /// Stored contents without sensing (no noise, no trace event).
  Word peek(RowAddress addr) const;
  MtjState cell(RowAddress addr, std::size_t col) const;

  void set_zone(std::optional<ThermalZone> zone) { zone_ = std::move(zone); }
  const std::optional<ThermalZone>& zone() const { return zone_; }

  void set_random_stream(RandomStream rng) { rng_ = std::move(rng); }
  RandomStream& random_stream() { return rng_; }

  const ExecutionTrace& trace() const { return trace_; }
  ExecutionTrace take_trace();

  /// Hex dump, one "bank:row HEX" line per row after a geometry header.
  std::string export_hex() const;
  void import_hex(std::string_view text);

 private:
  void check(RowAddress addr) const;
  std::size_t index(RowAddress addr) const;
  const DisturbanceModel& disturbance_for(OpKind op, RowAddress a, std::optional<RowAddress> b) const;
  void record(OpKind op, const DataContext& data, Channel channel);
  void store(RowAddress addr, std::uint64_t bits);

  ArraySetup setup_;
  std::vector<std::uint64_t> rows_;
  std::optional<ThermalZone> zone_;
  RandomStream rng_;
  ExecutionTrace trace_;
  DisturbanceModel no_disturbance_;
};

}  // namespace spincim
