#include "spincim/cim_array.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <sstream>

#include "spincim/errors.hpp"
#include "spincim/format.hpp"

namespace spincim {

// ---- Word ----

Word::Word(std::uint64_t bits, std::size_t width) : bits_(bits & mask(width)), width_(width) {
  if (width == 0 || width > kMaxWordWidth) {
    throw OutOfBounds("word width must lie in [1, 64], got " + std::to_string(width));
  }
}

Word Word::from_hex(std::string_view hex, std::size_t width) {
  if (hex.starts_with("0x") || hex.starts_with("0X")) hex.remove_prefix(2);
  std::uint64_t v = 0;
  const auto res = std::from_chars(hex.data(), hex.data() + hex.size(), v, 16);
  if (hex.empty() || res.ec != std::errc{} || res.ptr != hex.data() + hex.size()) {
    throw ConfigError("bad hex word '" + std::string(hex) + "'");
  }
  if ((v & ~mask(width)) != 0) throw ConfigError("hex word '" + std::string(hex) + "' wider than " + std::to_string(width) + " bits");
  return Word(v, width);
}

void Word::set_bit(std::size_t col, bool value) {
  if (col >= width_) throw OutOfBounds("column " + std::to_string(col) + " out of range");
  const std::uint64_t m = std::uint64_t{1} << col;
  bits_ = value ? (bits_ | m) : (bits_ & ~m);
}

std::size_t Word::popcount() const { return static_cast<std::size_t>(std::popcount(bits_)); }

std::string Word::to_hex() const {
  const std::size_t digits = (width_ + 3) / 4;
  std::string out(digits, '0');
  for (std::size_t i = 0; i < digits; ++i) {
    out[digits - 1 - i] = "0123456789ABCDEF"[(bits_ >> (4 * i)) & 0xF];
  }
  return out;
}

// ---- geometry, addresses, sensing ----

void ArrayGeometry::validate() const {
  if (banks < 1 || rows_per_bank < 1 || cols_per_row < 1) {
    throw ConfigError("array geometry: banks, rows_per_bank and cols_per_row must be >= 1");
  }
  if (cols_per_row > kMaxWordWidth) throw ConfigError("array geometry: cols_per_row must be <= 64");
}

std::string RowAddress::to_string() const { return std::to_string(bank) + ":" + std::to_string(row); }

SenseConfig SenseConfig::midpoints(const CurrentLevelModel& m) {
  return {(m.i_ap + m.i_p) / 2.0, (m.i_apap + m.i_app) / 2.0, (m.i_app + m.i_pp) / 2.0};
}

void SenseConfig::validate(const CurrentLevelModel& m) const {
  if (!(m.i_ap < i_ref_read && i_ref_read < m.i_p)) throw ConfigError("sense: require i_ap < i_ref_read < i_p");
  if (!(m.i_apap < i_ref_or && i_ref_or < m.i_app)) throw ConfigError("sense: require i_apap < i_ref_or < i_app");
  if (!(m.i_app < i_ref_and && i_ref_and < m.i_pp)) throw ConfigError("sense: require i_app < i_ref_and < i_pp");
}

bool DecodeRule::apply(double current) const {
  switch (kind) {
    case DecodeKind::Threshold:
      return current > lo;
    case DecodeKind::InvertedThreshold:
      return current <= lo;
    case DecodeKind::Window:
      return lo < current && current <= hi;
  }
  return false;
}

DecodeRule decode_rule(OpKind op, const SenseConfig& s) {
  switch (op) {
    case OpKind::Read:
      return {DecodeKind::Threshold, s.i_ref_read, 0.0};
    case OpKind::CimNOT:
      return {DecodeKind::InvertedThreshold, s.i_ref_read, 0.0};
    case OpKind::CimAND:
      return {DecodeKind::Threshold, s.i_ref_and, 0.0};
    case OpKind::CimOR:
      return {DecodeKind::Threshold, s.i_ref_or, 0.0};
    case OpKind::CimNAND:
      return {DecodeKind::InvertedThreshold, s.i_ref_and, 0.0};
    case OpKind::CimNOR:
      return {DecodeKind::InvertedThreshold, s.i_ref_or, 0.0};
    case OpKind::CimXOR:
      return {DecodeKind::Window, s.i_ref_or, s.i_ref_and};
    default:
      throw UnknownOp(std::string(to_string(op)) + " has no sense decode rule");
  }
}

bool decode(OpKind op, double current, const SenseConfig& sense) {
  return decode_rule(op, sense).apply(current);
}

bool ThermalZone::affects(OpKind op, RowAddress a, std::optional<RowAddress> b) const {
  if (!ops.empty() && std::find(ops.begin(), ops.end(), op) == ops.end()) return false;
  const auto hit = [&](RowAddress r) { return std::find(rows.begin(), rows.end(), r) != rows.end(); };
  return hit(a) || (b && hit(*b));
}

void validate_mapping(RowAddress a, RowAddress b) {
  if (a.bank != b.bank) {
    throw MappingViolation("operands " + a.to_string() + " and " + b.to_string() + " must be in the same bank");
  }
  if (a.row == b.row) {
    throw MappingViolation("operands " + a.to_string() + " and " + b.to_string() + " must be mapped to different rows");
  }
}

// ---- CimArray ----

CimArray::CimArray(ArraySetup setup, std::uint64_t seed) : setup_(std::move(setup)), rng_(seed) {
  setup_.geometry.validate();
  setup_.levels.validate_allow_zero_noise();
  setup_.sense.validate(setup_.levels);
  setup_.costs.validate();
  rows_.assign(setup_.geometry.banks * setup_.geometry.rows_per_bank, 0);
}

void CimArray::check(RowAddress addr) const {
  if (addr.bank >= setup_.geometry.banks || addr.row >= setup_.geometry.rows_per_bank) {
    throw OutOfBounds("row address " + addr.to_string() + " outside " + std::to_string(setup_.geometry.banks) + "x" +
                      std::to_string(setup_.geometry.rows_per_bank) + " array");
  }
}

std::size_t CimArray::index(RowAddress addr) const { return addr.bank * setup_.geometry.rows_per_bank + addr.row; }

const DisturbanceModel& CimArray::disturbance_for(OpKind op, RowAddress a, std::optional<RowAddress> b) const {
  if (zone_ && zone_->affects(op, a, b)) return zone_->disturbance;
  return no_disturbance_;
}

void CimArray::record(OpKind op, const DataContext& data, Channel channel) {
  const OpCost cost = cost_of(op, data, setup_.costs, setup_.variant);
  trace_.append(classify(op, data), data, cost, channel);
}

void CimArray::store(RowAddress addr, std::uint64_t bits) { rows_[index(addr)] = bits & Word::mask(width()); }

void CimArray::write_word(RowAddress addr, const Word& data, Channel channel) {
  check(addr);
  if (data.width() != width()) {
    throw OutOfBounds("write of " + std::to_string(data.width()) + "-bit word into " + std::to_string(width()) +
                      "-bit row");
  }
  // Cost lookup first so an unsupported table leaves the array untouched.
  const DataContext ctx = DataContext::of(data.bits(), width());
  const OpCost cost = cost_of(OpKind::Write, ctx, setup_.costs, setup_.variant);
  store(addr, data.bits());
  trace_.append(classify(OpKind::Write, ctx), ctx, cost, channel);
}

Word CimArray::read_word(RowAddress addr, Channel channel) {
  check(addr);
  const std::uint64_t stored = rows_[index(addr)];
  const auto& dist = disturbance_for(OpKind::Read, addr, std::nullopt);
  const auto rule = decode_rule(OpKind::Read, setup_.sense);
  Word out = Word::zeros(width());
  for (std::size_t col = 0; col < width(); ++col) {
    const auto state = from_bit((stored >> col) & 1u);
    out.set_bit(col, rule.apply(sample_single_current(state, setup_.levels, dist, rng_)));
  }
  record(OpKind::Read, DataContext::of(stored, width()), channel);
  return out;
}

Word CimArray::cim_not(RowAddress a, std::optional<RowAddress> dest, Channel channel) {
  check(a);
  if (dest) check(*dest);
  const std::uint64_t stored = rows_[index(a)];
  const auto& dist = disturbance_for(OpKind::CimNOT, a, std::nullopt);
  const auto rule = decode_rule(OpKind::CimNOT, setup_.sense);
  Word out = Word::zeros(width());
  for (std::size_t col = 0; col < width(); ++col) {
    const auto state = from_bit((stored >> col) & 1u);
    out.set_bit(col, rule.apply(sample_single_current(state, setup_.levels, dist, rng_)));
  }
  record(OpKind::CimNOT, DataContext::of(stored, width()), channel);
  if (dest) store(*dest, out.bits());
  return out;
}

Word CimArray::cim_two_row(OpKind op, RowAddress a, RowAddress b, std::optional<RowAddress> dest, Channel channel) {
  if (!is_two_row(op) || op == OpKind::CimADD) {
    throw UnknownOp(std::string(to_string(op)) + " is not a two-row logic operation");
  }
  check(a);
  check(b);
  if (dest) check(*dest);
  validate_mapping(a, b);
  const std::uint64_t ra = rows_[index(a)];
  const std::uint64_t rb = rows_[index(b)];
  const auto& dist = disturbance_for(op, a, b);
  const auto rule = decode_rule(op, setup_.sense);
  Word out = Word::zeros(width());
  for (std::size_t col = 0; col < width(); ++col) {
    const CellPair pair{from_bit((ra >> col) & 1u), from_bit((rb >> col) & 1u)};
    out.set_bit(col, rule.apply(sample_pair_current(pair, setup_.levels, dist, rng_)));
  }
  record(op, {}, channel);
  if (dest) store(*dest, out.bits());
  return out;
}

Word CimArray::cim_xnor(RowAddress a, RowAddress b, RowAddress scratch_and, RowAddress scratch_nor) {
  check(scratch_and);
  check(scratch_nor);
  validate_mapping(a, b);
  if (scratch_and == a || scratch_and == b || scratch_nor == a || scratch_nor == b || scratch_and == scratch_nor) {
    throw MappingViolation("CimXNOR scratch rows must be distinct from each other and from the operands");
  }
  const Word conj = cim_two_row(OpKind::CimAND, a, b, scratch_and);
  const Word nor = cim_two_row(OpKind::CimNOR, a, b, scratch_nor);
  return Word(conj.bits() | nor.bits(), width());
}

bool CimArray::cim_add(RowAddress a, RowAddress b, RowAddress dest, Channel channel) {
  check(a);
  check(b);
  check(dest);
  validate_mapping(a, b);
  const std::uint64_t ra = rows_[index(a)];
  const std::uint64_t rb = rows_[index(b)];
  const auto& dist = disturbance_for(OpKind::CimADD, a, b);
  const auto& s = setup_.sense;
  const auto xor_rule = decode_rule(OpKind::CimXOR, s);
  const auto and_rule = decode_rule(OpKind::CimAND, s);
  const auto or_rule = decode_rule(OpKind::CimOR, s);
  // Cost lookup before mutating dest.
  const OpCost cost = cost_of(OpKind::CimADD, {}, setup_.costs, setup_.variant);
  std::uint64_t sum = 0;
  bool carry = false;
  for (std::size_t col = 0; col < width(); ++col) {
    const CellPair pair{from_bit((ra >> col) & 1u), from_bit((rb >> col) & 1u)};
    // One sense per column feeds all three decodes.
    const double current = sample_pair_current(pair, setup_.levels, dist, rng_);
    const bool half_sum = xor_rule.apply(current);
    const bool generate = and_rule.apply(current);
    const bool propagate = or_rule.apply(current);
    if (half_sum != carry) sum |= std::uint64_t{1} << col;
    carry = generate || (propagate && carry);
  }
  store(dest, sum);
  trace_.append(CostClass::CimADD, {}, cost, channel);
  return carry;
}

Word CimArray::peek(RowAddress addr) const {
  check(addr);
  return Word(rows_[index(addr)], width());
}

MtjState CimArray::cell(RowAddress addr, std::size_t col) const {
  check(addr);
  if (col >= width()) throw OutOfBounds("column " + std::to_string(col) + " out of range");
  return from_bit((rows_[index(addr)] >> col) & 1u);
}

ExecutionTrace CimArray::take_trace() {
  ExecutionTrace out = std::move(trace_);
  trace_ = ExecutionTrace{};
  return out;
}

std::string CimArray::export_hex() const {
  const auto& g = setup_.geometry;
  std::ostringstream out;
  out << "# spincim-hex banks=" << g.banks << " rows_per_bank=" << g.rows_per_bank << " cols_per_row=" << g.cols_per_row
      << '\n';
  for (std::size_t bank = 0; bank < g.banks; ++bank) {
    for (std::size_t row = 0; row < g.rows_per_bank; ++row) {
      out << bank << ':' << row << ' ' << peek({bank, row}).to_hex() << '\n';
    }
  }
  return out.str();
}

void CimArray::import_hex(std::string_view text) {
  const auto& g = setup_.geometry;
  std::vector<std::uint64_t> next(rows_.size(), 0);
  std::size_t line_no = 0;
  bool saw_header = false;
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (line.front() == '#') {
      std::ostringstream expect;
      expect << "# spincim-hex banks=" << g.banks << " rows_per_bank=" << g.rows_per_bank
             << " cols_per_row=" << g.cols_per_row;
      if (line.starts_with("# spincim-hex")) {
        if (line != expect.str()) throw ConfigError("hex dump geometry does not match the array");
        saw_header = true;
      }
      continue;
    }
    const auto space = line.find(' ');
    const auto colon = line.find(':');
    if (space == std::string_view::npos || colon == std::string_view::npos || colon > space) {
      throw ConfigError("hex dump line " + std::to_string(line_no) + ": expected 'bank:row HEX'");
    }
    std::size_t bank = 0, row = 0;
    const auto bank_s = line.substr(0, colon);
    const auto row_s = line.substr(colon + 1, space - colon - 1);
    if (std::from_chars(bank_s.data(), bank_s.data() + bank_s.size(), bank).ec != std::errc{} ||
        std::from_chars(row_s.data(), row_s.data() + row_s.size(), row).ec != std::errc{}) {
      throw ConfigError("hex dump line " + std::to_string(line_no) + ": bad address");
    }
    const RowAddress addr{bank, row};
    check(addr);
    next[index(addr)] = Word::from_hex(line.substr(space + 1), width()).bits();
  }
  if (!saw_header) throw ConfigError("hex dump is missing its '# spincim-hex' header");
  rows_ = std::move(next);
}

}  // namespace spincim
