#include "spincim/isa.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <optional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "spincim/digest.hpp"
#include "spincim/errors.hpp"
#include "spincim/format.hpp"

namespace spincim::isa {

namespace {

struct OpcodeInfo {
  Opcode op;
  std::string_view name;
};

constexpr std::array<OpcodeInfo, 15> kOpcodes = {{
    {Opcode::LOAD, "LOAD"},     {Opcode::STORE, "STORE"},   {Opcode::ADD, "ADD"},       {Opcode::AND, "AND"},
    {Opcode::OR, "OR"},         {Opcode::XOR, "XOR"},       {Opcode::NOT, "NOT"},       {Opcode::CimADD, "CimADD"},
    {Opcode::CimAND, "CimAND"}, {Opcode::CimOR, "CimOR"},   {Opcode::CimXOR, "CimXOR"}, {Opcode::CimNOT, "CimNOT"},
    {Opcode::CimNAND, "CimNAND"}, {Opcode::CimNOR, "CimNOR"}, {Opcode::HALT, "HALT"},
}};

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::optional<Opcode> lookup_mnemonic(std::string_view token) {
  const auto key = upper(token);
  for (const auto& info : kOpcodes) {
    if (upper(info.name) == key) return info.op;
  }
  return std::nullopt;
}

/// Operand text plus its 1-based column in the source line.
struct Token {
  std::string_view text;
  std::size_t column = 0;
};

std::vector<Token> split_operands(std::string_view rest, std::size_t offset) {
  std::vector<Token> out;
  if (rest.find_first_not_of(" \t") == std::string_view::npos) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = rest.find(',', start);
    auto piece = rest.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    std::size_t lead = 0;
    while (lead < piece.size() && (piece[lead] == ' ' || piece[lead] == '\t')) ++lead;
    piece.remove_prefix(lead);
    while (!piece.empty() && (piece.back() == ' ' || piece.back() == '\t')) piece.remove_suffix(1);
    out.push_back({piece, offset + start + lead + 1});
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

std::optional<std::size_t> parse_index(std::string_view s) {
  std::size_t v = 0;
  if (s.empty()) return std::nullopt;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<RowAddress> parse_numeric_address(std::string_view s) {
  if (!s.starts_with('@')) return std::nullopt;
  s.remove_prefix(1);
  const auto colon = s.find(':');
  if (colon == std::string_view::npos) {
    const auto row = parse_index(s);
    if (!row) return std::nullopt;
    return RowAddress{0, *row};
  }
  const auto bank = parse_index(s.substr(0, colon));
  const auto row = parse_index(s.substr(colon + 1));
  if (!bank || !row) return std::nullopt;
  return RowAddress{*bank, *row};
}

std::optional<std::uint8_t> parse_register(std::string_view s) {
  if (s.size() != 2 || (s[0] != 'R' && s[0] != 'r') || s[1] < '0' || s[1] > '7') return std::nullopt;
  return static_cast<std::uint8_t>(s[1] - '0');
}

struct SourceLine {
  std::size_t number = 0;
  std::string_view body;  // comment stripped
  std::size_t mnemonic_column = 0;
  std::string_view mnemonic;
  std::string_view rest;
  std::size_t rest_offset = 0;
};

std::vector<SourceLine> scan(std::string_view source) {
  std::vector<SourceLine> lines;
  std::size_t number = 0;
  for (auto raw : split(source, '\n')) {
    ++number;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    const auto comment = raw.find_first_of(";#");
    auto body = raw.substr(0, comment);
    const auto first = body.find_first_not_of(" \t");
    if (first == std::string_view::npos) continue;
    SourceLine line;
    line.number = number;
    line.body = body;
    const auto end = body.find_first_of(" \t", first);
    line.mnemonic = body.substr(first, end == std::string_view::npos ? std::string_view::npos : end - first);
    line.mnemonic_column = first + 1;
    if (end != std::string_view::npos) {
      line.rest = body.substr(end);
      line.rest_offset = end;
    }
    lines.push_back(line);
  }
  return lines;
}

std::size_t operand_count(Opcode op) {
  switch (op) {
    case Opcode::HALT:
      return 0;
    case Opcode::LOAD:
    case Opcode::STORE:
    case Opcode::NOT:
    case Opcode::CimNOT:
      return 2;
    default:
      return 3;
  }
}

}  // namespace

std::string_view to_string(Opcode op) {
  for (const auto& info : kOpcodes) {
    if (info.op == op) return info.name;
  }
  return "?";
}

bool is_cim(Opcode op) {
  switch (op) {
    case Opcode::CimADD:
    case Opcode::CimAND:
    case Opcode::CimOR:
    case Opcode::CimXOR:
    case Opcode::CimNOT:
    case Opcode::CimNAND:
    case Opcode::CimNOR:
      return true;
    default:
      return false;
  }
}

Program assemble(std::string_view source) {
  const auto lines = scan(source);
  Program program;

  // Pass 1: pinned symbols.
  std::set<RowAddress> pinned;
  for (const auto& line : lines) {
    if (upper(line.mnemonic) != ".EQU") continue;
    const auto ops = split_operands(line.rest, line.rest_offset);
    if (ops.size() != 2) throw ParseError(line.number, line.mnemonic_column, ".equ expects NAME, address");
    if (!is_identifier(ops[0].text) || parse_register(ops[0].text)) {
      throw ParseError(line.number, ops[0].column, "bad symbol name '" + std::string(ops[0].text) + "'");
    }
    const auto addr = parse_numeric_address(ops[1].text);
    if (!addr) throw ParseError(line.number, ops[1].column, "expected @bank:row or @row");
    const std::string name(ops[0].text);
    if (program.symbols.count(name)) throw ParseError(line.number, ops[0].column, "symbol '" + name + "' redefined");
    program.symbols[name] = *addr;
    pinned.insert(*addr);
  }

  std::size_t next_auto_row = 0;
  auto resolve = [&](const SourceLine& line, const Token& tok) -> RowAddress {
    if (auto addr = parse_numeric_address(tok.text)) return *addr;
    if (parse_register(tok.text)) {
      throw ParseError(line.number, tok.column, "expected a row address, got register " + std::string(tok.text));
    }
    if (!is_identifier(tok.text)) {
      throw ParseError(line.number, tok.column, "bad address '" + std::string(tok.text) + "'");
    }
    const std::string name(tok.text);
    if (auto it = program.symbols.find(name); it != program.symbols.end()) return it->second;
    while (pinned.count(RowAddress{0, next_auto_row})) ++next_auto_row;
    const RowAddress addr{0, next_auto_row++};
    pinned.insert(addr);
    program.symbols[name] = addr;
    return addr;
  };
  auto reg = [&](const SourceLine& line, const Token& tok) -> std::uint8_t {
    const auto r = parse_register(tok.text);
    if (!r) throw ParseError(line.number, tok.column, "expected register R0..R7, got '" + std::string(tok.text) + "'");
    return *r;
  };

  // Pass 2: instructions.
  for (const auto& line : lines) {
    if (upper(line.mnemonic) == ".EQU") continue;
    const auto op = lookup_mnemonic(line.mnemonic);
    if (!op) throw ParseError(line.number, line.mnemonic_column, "unknown mnemonic '" + std::string(line.mnemonic) + "'");
    const auto ops = split_operands(line.rest, line.rest_offset);
    if (ops.size() != operand_count(*op)) {
      throw ParseError(line.number, line.mnemonic_column,
                       std::string(to_string(*op)) + " expects " + std::to_string(operand_count(*op)) + " operands, got " +
                           std::to_string(ops.size()));
    }
    for (const auto& tok : ops) {
      if (tok.text.empty()) throw ParseError(line.number, tok.column, "empty operand");
    }
    Instruction ins;
    ins.opcode = *op;
    switch (*op) {
      case Opcode::HALT:
        break;
      case Opcode::LOAD:
      case Opcode::STORE:
        ins.regs[0] = reg(line, ops[0]);
        ins.addrs[0] = resolve(line, ops[1]);
        break;
      case Opcode::NOT:
        ins.regs[0] = reg(line, ops[0]);
        ins.regs[1] = reg(line, ops[1]);
        break;
      case Opcode::ADD:
      case Opcode::AND:
      case Opcode::OR:
      case Opcode::XOR:
        for (std::size_t i = 0; i < 3; ++i) ins.regs[i] = reg(line, ops[i]);
        break;
      default:
        for (std::size_t i = 0; i < ops.size(); ++i) ins.addrs[i] = resolve(line, ops[i]);
        break;
    }
    program.code.push_back(ins);
  }
  return program;
}

std::string disassemble(const Program& program) {
  std::ostringstream out;
  const auto addr = [](RowAddress a) { return "@" + a.to_string(); };
  const auto reg = [](std::uint8_t r) { return "R" + std::to_string(r); };
  for (const auto& ins : program.code) {
    out << to_string(ins.opcode);
    switch (ins.opcode) {
      case Opcode::HALT:
        break;
      case Opcode::LOAD:
      case Opcode::STORE:
        out << ' ' << reg(ins.regs[0]) << ", " << addr(ins.addrs[0]);
        break;
      case Opcode::NOT:
        out << ' ' << reg(ins.regs[0]) << ", " << reg(ins.regs[1]);
        break;
      case Opcode::ADD:
      case Opcode::AND:
      case Opcode::OR:
      case Opcode::XOR:
        out << ' ' << reg(ins.regs[0]) << ", " << reg(ins.regs[1]) << ", " << reg(ins.regs[2]);
        break;
      case Opcode::CimNOT:
        out << ' ' << addr(ins.addrs[0]) << ", " << addr(ins.addrs[1]);
        break;
      default:
        out << ' ' << addr(ins.addrs[0]) << ", " << addr(ins.addrs[1]) << ", " << addr(ins.addrs[2]);
        break;
    }
    out << '\n';
  }
  return out.str();
}

std::string ExecStats::to_json() const {
  nlohmann::ordered_json j;
  j["instruction_count"] = instruction_count;
  j["memory_access_count"] = memory_access_count;
  j["bus_transfers"] = bus_transfers;
  j["in_memory_ops"] = in_memory_ops;
  j["total_delay_ns"] = total_delay_ns;
  j["total_energy_fJ"] = total_energy_fj;
  return j.dump(2);
}

namespace {

OpKind cim_kind(Opcode op) {
  switch (op) {
    case Opcode::CimAND:
      return OpKind::CimAND;
    case Opcode::CimOR:
      return OpKind::CimOR;
    case Opcode::CimXOR:
      return OpKind::CimXOR;
    case Opcode::CimNAND:
      return OpKind::CimNAND;
    case Opcode::CimNOR:
      return OpKind::CimNOR;
    case Opcode::CimNOT:
      return OpKind::CimNOT;
    case Opcode::CimADD:
      return OpKind::CimADD;
    default:
      throw UnknownOp(std::string(to_string(op)) + " is not an in-memory op");
  }
}

}  // namespace

RunResult run(const Program& program, Machine& machine) {
  auto& array = machine.array;
  const std::uint64_t mask = Word::mask(array.width());
  const std::size_t first_event = array.trace().size();
  std::size_t executed = 0;

  for (std::size_t pc = 0; pc < program.code.size(); ++pc) {
    if (executed >= machine.step_budget) {
      throw StepBudgetExceeded("program exceeded the step budget of " + std::to_string(machine.step_budget));
    }
    const auto& ins = program.code[pc];
    ++executed;
    auto& r = machine.regs;
    switch (ins.opcode) {
      case Opcode::HALT:
        pc = program.code.size();
        break;
      case Opcode::LOAD:
        r[ins.regs[0]] = array.read_word(ins.addrs[0], Channel::Bus).bits();
        break;
      case Opcode::STORE:
        array.write_word(ins.addrs[0], Word(r[ins.regs[0]], array.width()), Channel::Bus);
        break;
      case Opcode::ADD:
        r[ins.regs[0]] = (r[ins.regs[1]] + r[ins.regs[2]]) & mask;
        break;
      case Opcode::AND:
        r[ins.regs[0]] = r[ins.regs[1]] & r[ins.regs[2]];
        break;
      case Opcode::OR:
        r[ins.regs[0]] = r[ins.regs[1]] | r[ins.regs[2]];
        break;
      case Opcode::XOR:
        r[ins.regs[0]] = r[ins.regs[1]] ^ r[ins.regs[2]];
        break;
      case Opcode::NOT:
        r[ins.regs[0]] = ~r[ins.regs[1]] & mask;
        break;
      case Opcode::CimADD:
        array.cim_add(ins.addrs[0], ins.addrs[1], ins.addrs[2], Channel::InMemory);
        break;
      case Opcode::CimNOT:
        array.cim_not(ins.addrs[0], ins.addrs[1], Channel::InMemory);
        break;
      default:
        array.cim_two_row(cim_kind(ins.opcode), ins.addrs[0], ins.addrs[1], ins.addrs[2], Channel::InMemory);
        break;
    }
  }

  RunResult result;
  const auto& events = array.trace().events();
  for (std::size_t i = first_event; i < events.size(); ++i) {
    const auto& e = events[i];
    result.trace.append(e.kind, e.data, {e.duration_ns, e.energy_fj}, e.channel);
  }
  auto& s = result.stats;
  s.instruction_count = executed;
  s.bus_transfers = count_bus_transfers(result.trace);
  s.memory_access_count = count_memory_accesses(result.trace);
  s.in_memory_ops = s.memory_access_count - s.bus_transfers;
  s.total_delay_ns = result.trace.total_delay_ns();
  s.total_energy_fj = result.trace.total_energy_fj();
  return result;
}

Program lower_to_conventional(const Program& program) {
  Program out;
  out.symbols = program.symbols;
  constexpr auto A = kLoweringTempA;
  constexpr auto B = kLoweringTempB;
  const auto load = [](std::uint8_t r, RowAddress a) {
    Instruction i;
    i.opcode = Opcode::LOAD;
    i.regs[0] = r;
    i.addrs[0] = a;
    return i;
  };
  const auto store = [](std::uint8_t r, RowAddress a) {
    Instruction i;
    i.opcode = Opcode::STORE;
    i.regs[0] = r;
    i.addrs[0] = a;
    return i;
  };
  const auto alu = [](Opcode op, std::uint8_t d, std::uint8_t x, std::uint8_t y) {
    Instruction i;
    i.opcode = op;
    i.regs = {d, x, y};
    return i;
  };
  for (const auto& ins : program.code) {
    if (!is_cim(ins.opcode)) {
      out.code.push_back(ins);
      continue;
    }
    if (ins.opcode == Opcode::CimNOT) {
      out.code.push_back(load(A, ins.addrs[0]));
      out.code.push_back(alu(Opcode::NOT, A, A, 0));
      out.code.push_back(store(A, ins.addrs[1]));
      continue;
    }
    out.code.push_back(load(A, ins.addrs[0]));
    out.code.push_back(load(B, ins.addrs[1]));
    switch (ins.opcode) {
      case Opcode::CimADD:
        out.code.push_back(alu(Opcode::ADD, A, A, B));
        break;
      case Opcode::CimAND:
        out.code.push_back(alu(Opcode::AND, A, A, B));
        break;
      case Opcode::CimOR:
        out.code.push_back(alu(Opcode::OR, A, A, B));
        break;
      case Opcode::CimXOR:
        out.code.push_back(alu(Opcode::XOR, A, A, B));
        break;
      case Opcode::CimNAND:
        out.code.push_back(alu(Opcode::AND, A, A, B));
        out.code.push_back(alu(Opcode::NOT, A, A, 0));
        break;
      case Opcode::CimNOR:
        out.code.push_back(alu(Opcode::OR, A, A, B));
        out.code.push_back(alu(Opcode::NOT, A, A, 0));
        break;
      default:
        break;
    }
    out.code.push_back(store(A, ins.addrs[2]));
  }
  return out;
}

MachineDescription describe(const Machine& machine) {
  const auto& setup = machine.array.setup();
  MachineDescription d;
  d.geometry = setup.geometry;
  d.references = setup.sense;
  d.variant = setup.variant;
  d.peripheral = machine.peripheral;
  d.register_count = machine.regs.size();
  for (OpKind op : kAllOpKinds) {
    try {
      (void)cost_of(op, DataContext{1, 0}, setup.costs, setup.variant);
      d.sense_capabilities.push_back(op);
    } catch (const UnknownOp&) {
    }
  }
  return d;
}

std::string static_fingerprint(const MachineDescription& d) {
  std::ostringstream canon;
  canon << "geometry=" << d.geometry.banks << 'x' << d.geometry.rows_per_bank << 'x' << d.geometry.cols_per_row << ';';
  canon << "capabilities=";
  for (OpKind op : d.sense_capabilities) canon << to_string(op) << ',';
  canon << ";references=" << format_double(d.references.i_ref_read) << ',' << format_double(d.references.i_ref_or)
        << ',' << format_double(d.references.i_ref_and) << ';';
  canon << "variant=" << to_string(d.variant) << ";registers=" << d.register_count << ";peripheral=" << d.peripheral;
  return sha256_hex(canon.str());
}

}  // namespace spincim::isa
