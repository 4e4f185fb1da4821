#pragma once

#include <string>

#include "spincim/isa.hpp"
#include "spincim/random.hpp"

namespace spincim::testing {

// Random straight-line program over rows 0..15 and registers R0..R5 that
// mixes CPU and in-memory instructions.
inline std::string random_program(RandomStream& rng, std::size_t length) {
  static constexpr const char* kBinary[] = {"CimADD", "CimAND", "CimOR", "CimXOR", "CimNAND", "CimNOR"};
  static constexpr const char* kAlu[] = {"ADD", "AND", "OR", "XOR"};
  const auto row = [&] { return "@" + std::to_string(rng.bits() % 16); };
  const auto reg = [&] { return "R" + std::to_string(rng.bits() % 6); };
  std::string src;
  for (std::size_t i = 0; i < length; ++i) {
    switch (rng.bits() % 6) {
      case 0:
      case 1: {
        const auto a = rng.bits() % 16;
        const auto b = (a + 1 + rng.bits() % 15) % 16;
        src += std::string(kBinary[rng.bits() % 6]) + " @" + std::to_string(a) + ", @" + std::to_string(b) + ", " +
               row() + "\n";
        break;
      }
      case 2:
        src += "CimNOT " + row() + ", " + row() + "\n";
        break;
      case 3:
        src += "LOAD " + reg() + ", " + row() + "\n";
        break;
      case 4:
        src += "STORE " + reg() + ", " + row() + "\n";
        break;
      default:
        if (rng.bits() & 1) {
          src += std::string(kAlu[rng.bits() % 4]) + " " + reg() + ", " + reg() + ", " + reg() + "\n";
        } else {
          src += "NOT " + reg() + ", " + reg() + "\n";
        }
        break;
    }
  }
  return src;
}

// Fills rows 0..15 of a fresh machine with random words.
inline void randomize_memory(isa::Machine& m, RandomStream& rng) {
  for (std::size_t r = 0; r < 16; ++r) m.array.write_word({0, r}, Word(rng.bits(), m.array.width()));
  m.array.take_trace();
}

}  // namespace spincim::testing
