#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "spincim/cim_array.hpp"
#include "spincim/cost_model.hpp"

namespace spincim::isa {

enum class Opcode {
  LOAD,
  STORE,
  ADD,
  AND,
  OR,
  XOR,
  NOT,
  CimADD,
  CimAND,
  CimOR,
  CimXOR,
  CimNOT,
  CimNAND,
  CimNOR,
  HALT,
};

std::string_view to_string(Opcode op);
bool is_cim(Opcode op);

inline constexpr std::size_t kRegisterCount = 8;
/// Scratch registers claimed by lower_to_conventional.
inline constexpr std::uint8_t kLoweringTempA = 6;
inline constexpr std::uint8_t kLoweringTempB = 7;

/// CPU opcodes use `regs`, Cim opcodes use `addrs` (operands then destination).
/// LOAD/STORE use regs[0] and addrs[0].
struct Instruction {
  Opcode opcode = Opcode::HALT;
  std::array<std::uint8_t, 3> regs{};
  std::array<RowAddress, 3> addrs{};

  friend bool operator==(const Instruction&, const Instruction&) = default;
};

struct Program {
  std::vector<Instruction> code;
  /// Address symbols resolved while assembling.
  std::map<std::string, RowAddress> symbols;
};

/// Grammar (one statement per line, `;` or `#` starts a comment):
///   LOAD  Rd, addr        STORE Rs, addr
///   ADD|AND|OR|XOR Rd, Ra, Rb      NOT Rd, Ra
///   CimADD|CimAND|CimOR|CimXOR|CimNAND|CimNOR addr, addr, addr
///   CimNOT addr, addr     HALT
///   .equ NAME, addr
/// addr is `@bank:row`, `@row` (bank 0) or a symbol. Symbols not pinned by
/// `.equ` get consecutive bank-0 rows in order of first use. Mnemonics are
/// case-insensitive; registers are R0..R7.
Program assemble(std::string_view source);

/// Renders numeric addresses only, so assemble(disassemble(p)).code == p.code.
std::string disassemble(const Program& program);

struct ExecStats {
  std::size_t instruction_count = 0;
  std::size_t memory_access_count = 0;
  std::size_t bus_transfers = 0;
  std::size_t in_memory_ops = 0;
  double total_delay_ns = 0.0;
  double total_energy_fj = 0.0;

  std::string to_json() const;
};

struct Machine {
  explicit Machine(ArraySetup setup, std::uint64_t seed = 0) : array(std::move(setup), seed) {}

  CimArray array;
  std::array<std::uint64_t, kRegisterCount> regs{};
  std::size_t step_budget = 1'000'000;
  /// Free-form peripheral description (sense amplifier / reference generator).
  std::string peripheral = "current-sense SA with read/or/and reference generator";
};

struct RunResult {
  ExecStats stats;
  ExecutionTrace trace;
};

/// LOAD/STORE are Bus transfers, Cim ops are single InMemory events whose
/// destination store is covered by the op cost.
RunResult run(const Program& program, Machine& machine);

/// Replaces each Cim instruction with LOAD/LOAD/op/STORE (using R6, R7).
Program lower_to_conventional(const Program& program);

/// Everything visible to a netlist-level reverse engineer.
struct MachineDescription {
  ArrayGeometry geometry;
  std::vector<OpKind> sense_capabilities;
  SenseConfig references;
  TableVariant variant = TableVariant::Enhanced;
  std::size_t register_count = kRegisterCount;
  std::string peripheral;
};

MachineDescription describe(const Machine& machine);

/// SHA-256 hex digest over the static description; independent of program,
/// memory contents and seeds.
std::string static_fingerprint(const MachineDescription& description);

}  // namespace spincim::isa
