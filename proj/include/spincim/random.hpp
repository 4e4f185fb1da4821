#pragma once

#include <cstdint>
#include <random>

namespace spincim {

/// Seeded random source. Monte Carlo callers derive one stream per trial
/// from (master seed, trial index) so results do not depend on how trials
/// are spread over threads.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed = 0);

  /// Independent stream for trial `index` under `master`.
  static RandomStream for_trial(std::uint64_t master, std::uint64_t index);

  double uniform();
  double normal();
  bool bernoulli(double p);
  std::uint64_t bits();

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace spincim
