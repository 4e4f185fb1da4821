#include <catch_amalgamated.hpp>

#include "spincim/cim_array.hpp"
#include "spincim/errors.hpp"

using namespace spincim;

namespace {

ArraySetup quiet(std::size_t cols = 16) {
  ArraySetup s;
  s.geometry.cols_per_row = cols;
  s.levels.sigma = 0.0;
  return s;
}

bool boolean(OpKind op, bool a, bool b) {
  switch (op) {
    case OpKind::CimAND: return a && b;
    case OpKind::CimOR: return a || b;
    case OpKind::CimNAND: return !(a && b);
    case OpKind::CimNOR: return !(a || b);
    case OpKind::CimXOR: return a != b;
    default: throw std::logic_error("not a two-row op");
  }
}

constexpr RowAddress kA{0, 0}, kB{0, 1}, kD{0, 2}, kE{0, 3};

}  // namespace

TEST_CASE("word basics") {
  const auto w = Word::from_hex("F0F0", 16);
  CHECK(w.popcount() == 8);
  CHECK(w.to_hex() == "F0F0");
  CHECK(Word::ones(12).all_ones());
  CHECK(Word::ones(12).to_hex() == "FFF");
  CHECK_THROWS_AS(Word::from_hex("1FFFF", 16), ConfigError);
  CHECK_THROWS_AS(Word::from_hex("xyz", 16), ConfigError);
  auto z = Word::zeros(4);
  z.set_bit(3, true);
  CHECK(z.bits() == 8);
  CHECK_THROWS_AS(z.set_bit(4, true), OutOfBounds);
}

TEST_CASE("default references are the level midpoints") {
  const CurrentLevelModel m;
  const auto mid = SenseConfig::midpoints(m);
  const SenseConfig def;
  CHECK(mid.i_ref_read == def.i_ref_read);
  CHECK(mid.i_ref_or == Catch::Approx(def.i_ref_or));
  CHECK(mid.i_ref_and == Catch::Approx(def.i_ref_and));
  SenseConfig bad;
  bad.i_ref_and = 23.0;
  CHECK_THROWS_AS(bad.validate(m), ConfigError);
}

TEST_CASE("zero-noise truth tables") {
  CimArray arr(quiet(4));
  // Columns enumerate (a, b) = (0,0), (1,0), (0,1), (1,1).
  arr.write_word(kA, Word(0b1010, 4));
  arr.write_word(kB, Word(0b1100, 4));
  for (auto op : {OpKind::CimAND, OpKind::CimOR, OpKind::CimNAND, OpKind::CimNOR, OpKind::CimXOR}) {
    const Word out = arr.cim_two_row(op, kA, kB);
    for (std::size_t col = 0; col < 4; ++col) {
      INFO(to_string(op) << " column " << col);
      CHECK(out.bit(col) == boolean(op, (0b1010 >> col) & 1, (0b1100 >> col) & 1));
    }
  }
  CHECK(arr.cim_not(kA).bits() == 0b0101);
  CHECK(arr.read_word(kA).bits() == 0b1010);
}

TEST_CASE("De Morgan identities at zero noise") {
  CimArray arr(quiet());
  RandomStream rng(4);
  for (int i = 0; i < 200; ++i) {
    const Word a(rng.bits(), 16), b(rng.bits(), 16);
    arr.write_word(kA, a);
    arr.write_word(kB, b);
    arr.cim_not(kA, kD);
    arr.cim_not(kB, kE);
    CHECK(arr.cim_two_row(OpKind::CimNAND, kA, kB) == arr.cim_two_row(OpKind::CimOR, kD, kE));
    CHECK(arr.cim_two_row(OpKind::CimNOR, kA, kB) == arr.cim_two_row(OpKind::CimAND, kD, kE));
  }
}

TEST_CASE("CimADD equals integer addition on all 8-bit pairs") {
  CimArray arr(quiet(8));
  for (std::uint64_t a = 0; a < 256; ++a) {
    arr.write_word(kA, Word(a, 8));
    for (std::uint64_t b = 0; b < 256; ++b) {
      arr.write_word(kB, Word(b, 8));
      const bool carry = arr.cim_add(kA, kB, kD);
      REQUIRE(arr.peek(kD).bits() + (carry ? 256u : 0u) == a + b);
    }
    arr.take_trace();
  }
}

TEST_CASE("XNOR of a word with itself is all ones") {
  CimArray arr(quiet());
  RandomStream rng(8);
  for (int i = 0; i < 1000; ++i) {
    const Word x(rng.bits(), 16);
    arr.write_word(kA, x);
    arr.write_word(kB, x);
    REQUIRE(arr.cim_xnor(kA, kB, kD, kE).all_ones());
  }
}

TEST_CASE("mapping rules") {
  ArraySetup s = quiet();
  s.geometry.banks = 2;
  CimArray arr(s);
  CHECK_THROWS_AS(arr.cim_two_row(OpKind::CimAND, kA, kA), MappingViolation);
  CHECK_THROWS_AS(arr.cim_two_row(OpKind::CimAND, kA, {1, 1}), MappingViolation);
  CHECK_THROWS_AS(arr.cim_xnor(kA, kB, kD, kD), MappingViolation);
  CHECK_THROWS_AS(arr.cim_xnor(kA, kB, kA, kD), MappingViolation);
  CHECK_THROWS_AS(arr.read_word({0, 64}), OutOfBounds);
  CHECK_THROWS_AS(arr.read_word({2, 0}), OutOfBounds);
  CHECK_THROWS_AS(arr.cim_two_row(OpKind::Read, kA, kB), UnknownOp);
  CHECK_THROWS_AS(arr.write_word(kA, Word(1, 8)), OutOfBounds);
  CHECK_NOTHROW(arr.cim_two_row(OpKind::CimAND, {1, 3}, {1, 4}));
}

TEST_CASE("every op is charged once with its table row") {
  CimArray arr(quiet());
  arr.write_word(kA, Word(0xFFFF, 16));
  arr.cim_two_row(OpKind::CimXOR, kA, kB, kD);
  arr.cim_add(kA, kB, kD);
  const auto tr = arr.take_trace();
  REQUIRE(tr.size() == 3);
  CHECK(tr.events()[0].kind == CostClass::Write1);
  CHECK(tr.events()[0].channel == Channel::Bus);
  CHECK(tr.events()[1].kind == CostClass::CimXOR);
  CHECK(tr.events()[1].energy_fj == 26.34);
  CHECK(tr.events()[2].kind == CostClass::CimADD);
  CHECK(tr.events()[2].channel == Channel::InMemory);
  CHECK(arr.trace().empty());
}

TEST_CASE("thermal zone scoping") {
  ThermalZone z{DisturbanceModel::mean_shift({1.0, 2.0, 3.0}), {kA}, {OpKind::CimAND}};
  CHECK(z.affects(OpKind::CimAND, kA, kB));
  CHECK(z.affects(OpKind::CimAND, kB, kA));
  CHECK_FALSE(z.affects(OpKind::CimOR, kA, kB));
  CHECK_FALSE(z.affects(OpKind::CimAND, kB, kD));

  // A large forced shift turns AND of (AP,P) into 1 only inside the zone.
  CimArray arr(quiet());
  arr.set_zone(z);
  arr.write_word(kA, Word(0x00FF, 16));
  arr.write_word(kB, Word(0x0000, 16));
  arr.write_word(kD, Word(0x00FF, 16));
  CHECK(arr.cim_two_row(OpKind::CimAND, kA, kB).bits() == 0x00FF);
  CHECK(arr.cim_two_row(OpKind::CimAND, kD, kB).bits() == 0x0000);
  CHECK(arr.cim_two_row(OpKind::CimOR, kA, kB).bits() == 0x00FF);
}

TEST_CASE("hex dump round-trips") {
  CimArray a(quiet());
  RandomStream rng(2);
  for (std::size_t r = 0; r < 64; r += 3) a.write_word({0, r}, Word(rng.bits(), 16));
  CimArray b(quiet());
  b.write_word({0, 1}, Word(0x1234, 16));
  b.import_hex(a.export_hex());
  CHECK(b.export_hex() == a.export_hex());
  CHECK(b.peek({0, 1}).bits() == 0);  // row 1 is zero in the imported dump
  CHECK_THROWS_AS(b.import_hex("0:1 FFFF\n"), ConfigError);
  CHECK_THROWS_AS(b.import_hex("# spincim-hex banks=1 rows_per_bank=32 cols_per_row=16\n"), ConfigError);
}

TEST_CASE("noisy reads stay accurate") {
  ArraySetup s;
  CimArray arr(s, 12);
  arr.write_word(kA, Word(0xA5A5, 16));
  for (int i = 0; i < 100; ++i) CHECK(arr.read_word(kA).bits() == 0xA5A5);
}
