#pragma once

#include <cstdint>

namespace spincim {

/// Upper tail of the standard normal, Q(z) = P(Z > z).
double normal_tail(double z);

/// Inverse of normal_tail for p in (0, 1).
double normal_tail_inverse(double p);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Wilson score interval for a binomial proportion; the default z gives 95%.
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = 1.959963984540054);

/// Standard error of a binomial proportion with success probability p over n trials.
double binomial_stderr(double p, std::uint64_t n);

}  // namespace spincim
