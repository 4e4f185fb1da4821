#include "spincim/random.hpp"

namespace spincim {

namespace {

// splitmix64 finaliser; spreads nearby (seed, index) pairs across the
// engine's seed space.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed) : engine_(mix(seed)) {}

RandomStream RandomStream::for_trial(std::uint64_t master, std::uint64_t index) {
  RandomStream s;
  s.engine_.seed(mix(mix(master) ^ index));
  return s;
}

double RandomStream::uniform() { return std::generate_canonical<double, 53>(engine_); }

double RandomStream::normal() { return normal_(engine_); }

bool RandomStream::bernoulli(double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return uniform() < p;
}

std::uint64_t RandomStream::bits() { return engine_(); }

}  // namespace spincim
