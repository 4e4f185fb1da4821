#include <catch_amalgamated.hpp>

#include <set>

#include "spincim/format.hpp"
#include "spincim/parallel.hpp"
#include "spincim/random.hpp"
#include "spincim/stats.hpp"

using namespace spincim;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("normal tail matches reference values") {
  // scipy.stats.norm.sf
  CHECK_THAT(normal_tail(1.0), WithinRel(0.15865525393145707, 1e-12));
  CHECK_THAT(normal_tail(3.0), WithinRel(0.0013498980316300933, 1e-12));
  CHECK_THAT(normal_tail(0.0), WithinAbs(0.5, 1e-15));
  CHECK_THAT(normal_tail(-1.0), WithinRel(1.0 - 0.15865525393145707, 1e-12));
  CHECK_THAT(normal_tail_inverse(0.005), WithinRel(2.575829303548901, 1e-10));
}

TEST_CASE("normal tail inverse round-trips") {
  for (double p : {1e-9, 1e-4, 0.01, 0.3, 0.5, 0.9}) {
    CHECK_THAT(normal_tail(normal_tail_inverse(p)), WithinRel(p, 1e-9));
  }
}

TEST_CASE("Wilson interval matches reference") {
  // statsmodels proportion_confint(method="wilson")
  const auto a = wilson_interval(5, 100);
  CHECK_THAT(a.lo, WithinAbs(0.021543679154367966, 1e-6));
  CHECK_THAT(a.hi, WithinAbs(0.11175046923191914, 1e-6));
  const auto b = wilson_interval(0, 1000);
  CHECK_THAT(b.lo, WithinAbs(0.0, 1e-12));
  CHECK_THAT(b.hi, WithinAbs(0.003826758485555125, 1e-6));
}

TEST_CASE("binomial stderr") {
  CHECK_THAT(binomial_stderr(0.5, 100), WithinAbs(0.05, 1e-15));
  CHECK(binomial_stderr(0.0, 10) == 0.0);
}

TEST_CASE("trial streams are reproducible and distinct") {
  auto a = RandomStream::for_trial(7, 3);
  auto b = RandomStream::for_trial(7, 3);
  for (int i = 0; i < 10; ++i) CHECK(a.bits() == b.bits());

  std::set<std::uint64_t> first;
  for (std::uint64_t i = 0; i < 1000; ++i) first.insert(RandomStream::for_trial(7, i).bits());
  CHECK(first.size() == 1000);
  CHECK(RandomStream::for_trial(7, 0).bits() != RandomStream::for_trial(8, 0).bits());
}

TEST_CASE("bernoulli edge probabilities are exact") {
  RandomStream r(1);
  for (int i = 0; i < 100; ++i) {
    CHECK_FALSE(r.bernoulli(0.0));
    CHECK(r.bernoulli(1.0));
  }
}

TEST_CASE("normal draws have unit variance") {
  RandomStream r(11);
  double s = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    s += x;
    s2 += x * x;
  }
  CHECK_THAT(s / n, WithinAbs(0.0, 0.01));
  CHECK_THAT(s2 / n, WithinAbs(1.0, 0.01));
}

TEST_CASE("parallel_map output is independent of thread count") {
  const auto fn = [](std::size_t i) { return RandomStream::for_trial(99, i).uniform(); };
  const auto one = parallel_map<double>(1001, 1, fn);
  for (unsigned t : {2u, 3u, 8u, 64u}) CHECK(parallel_map<double>(1001, t, fn) == one);
}

TEST_CASE("parallel_map rethrows worker exceptions") {
  const auto fn = [](std::size_t i) -> int {
    if (i == 17) throw std::runtime_error("boom");
    return 0;
  };
  CHECK_THROWS_AS(parallel_map<int>(100, 4, fn), std::runtime_error);
}

TEST_CASE("format_double round-trips") {
  for (double v : {0.1, 22.69, 3.1999999999999993, 1e-300, -4.4}) {
    CHECK(parse_double(format_double(v)).value() == v);
  }
  CHECK_FALSE(parse_double("1.5x").has_value());
  CHECK(parse_double(" 2.5 ").value() == 2.5);
}
