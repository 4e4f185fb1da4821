#include <catch_amalgamated.hpp>

#include "program_gen.hpp"
#include "spincim/errors.hpp"
#include "spincim/isa.hpp"

using namespace spincim;
using namespace spincim::isa;

namespace {

ArraySetup quiet() {
  ArraySetup s;
  s.levels.sigma = 0.0;
  return s;
}

constexpr const char* kAddProgram = R"(
.equ A, @0:0
.equ B, @0:1
.equ SUM, @0:2
CimADD A, B, SUM
)";

}  // namespace

TEST_CASE("assembler resolves symbols and numeric addresses") {
  const auto p = assemble(R"(
    .equ X, @0:5      ; pinned
    cimand X, tmp, @7  # lower-case mnemonic
    CimNOT tmp, other
    LOAD r1, @0:5
    HALT
  )");
  REQUIRE(p.code.size() == 4);
  CHECK(p.code[0].opcode == Opcode::CimAND);
  CHECK(p.code[0].addrs[0] == RowAddress{0, 5});
  CHECK(p.symbols.at("tmp") == RowAddress{0, 0});
  CHECK(p.symbols.at("other") == RowAddress{0, 1});
  CHECK(p.code[0].addrs[2] == RowAddress{0, 7});
  CHECK(p.code[2].regs[0] == 1);
}

TEST_CASE("auto-allocated symbols skip pinned rows") {
  const auto p = assemble(".equ P, @0\nCimAND P, q, r\n");
  CHECK(p.symbols.at("q") == RowAddress{0, 1});
  CHECK(p.symbols.at("r") == RowAddress{0, 2});
}

TEST_CASE("assembler errors carry line and column") {
  const auto expect_error = [](const char* src, std::size_t line, std::size_t col) {
    try {
      assemble(src);
      FAIL("expected ParseError for: " << src);
    } catch (const ParseError& e) {
      CHECK(e.line() == line);
      CHECK(e.column() == col);
    }
  };
  expect_error("FOO @1, @2, @3", 1, 1);
  expect_error("\n  CimAND @1, @2", 2, 3);
  expect_error("LOAD R9, @1", 1, 6);
  expect_error("CimAND @1, R2, @3", 1, 12);
  expect_error(".equ 1bad, @1", 1, 6);
  expect_error(".equ A, @1\n.equ A, @2", 2, 6);
}

TEST_CASE("disassembly round-trips") {
  RandomStream rng(1);
  for (int i = 0; i < 50; ++i) {
    const auto p = assemble(testing::random_program(rng, 30));
    CHECK(assemble(disassemble(p)).code == p.code);
  }
}

TEST_CASE("direct CimADD versus conventional lowering counts") {
  const auto p = assemble(kAddProgram);
  Machine direct(quiet());
  direct.array.write_word({0, 0}, Word(1234, 16));
  direct.array.write_word({0, 1}, Word(4321, 16));
  direct.array.take_trace();
  const auto d = run(p, direct);
  CHECK(d.stats.instruction_count == 1);
  CHECK(d.stats.memory_access_count == 1);
  CHECK(d.stats.bus_transfers == 0);
  CHECK(direct.array.peek({0, 2}).bits() == 5555);

  const auto low = lower_to_conventional(p);
  Machine conv(quiet());
  conv.array.write_word({0, 0}, Word(1234, 16));
  conv.array.write_word({0, 1}, Word(4321, 16));
  conv.array.take_trace();
  const auto c = run(low, conv);
  CHECK(c.stats.instruction_count == 4);
  CHECK(c.stats.memory_access_count == 3);
  CHECK(c.stats.bus_transfers == 3);
  CHECK(conv.array.peek({0, 2}).bits() == 5555);
}

TEST_CASE("lowered programs are equivalent at zero noise") {
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    auto rng = RandomStream::for_trial(77, trial);
    const auto p = assemble(testing::random_program(rng, 1 + rng.bits() % 40));
    const auto mem_seed = rng.bits();
    Machine direct(quiet()), conv(quiet());
    RandomStream m1(mem_seed), m2(mem_seed);
    testing::randomize_memory(direct, m1);
    testing::randomize_memory(conv, m2);
    run(p, direct);
    run(lower_to_conventional(p), conv);
    REQUIRE(direct.array.export_hex() == conv.array.export_hex());
    for (std::size_t r = 0; r < kLoweringTempA; ++r) REQUIRE(direct.regs[r] == conv.regs[r]);
  }
}

TEST_CASE("HALT stops execution and counts") {
  Machine m(quiet());
  const auto r = run(assemble("HALT\nCimNOT @0, @1\n"), m);
  CHECK(r.stats.instruction_count == 1);
  CHECK(r.trace.empty());
}

TEST_CASE("step budget") {
  Machine m(quiet());
  m.step_budget = 2;
  CHECK_THROWS_AS(run(assemble("NOT R0, R0\nNOT R0, R0\nNOT R0, R0\n"), m), StepBudgetExceeded);
}

TEST_CASE("run errors propagate from the array") {
  Machine m(quiet());
  CHECK_THROWS_AS(run(assemble("CimAND @0, @0, @1"), m), MappingViolation);
  CHECK_THROWS_AS(run(assemble("LOAD R0, @99"), m), OutOfBounds);
}

TEST_CASE("static fingerprint ignores program, memory and seed") {
  Machine a(quiet(), 1), b(quiet(), 99);
  b.array.write_word({0, 3}, Word(0xBEEF, 16));
  run(assemble(kAddProgram), b);
  CHECK(static_fingerprint(describe(a)) == static_fingerprint(describe(b)));
  CHECK(static_fingerprint(describe(a)).size() == 64);

  auto s = quiet();
  s.costs.enhanced.erase(CostClass::CimXOR);
  Machine c(s);
  CHECK(static_fingerprint(describe(c)) != static_fingerprint(describe(a)));
}
