#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "masslab/parallel.hpp"
#include "masslab/rng.hpp"

using namespace masslab;

TEST_CASE("Philox4x32-10 known answers") {
  using B = Philox4x32::Block;
  CHECK(Philox4x32::generate({0, 0, 0, 0}, {0, 0}) == B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::generate({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::generate({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("draws are pure functions of their counters") {
  CHECK(complex_gaussian(5, 7, 3) == complex_gaussian(5, 7, 3));
  CHECK(complex_gaussian(5, 7, 3) != complex_gaussian(5, 7, 4));
  CHECK(complex_gaussian(5, 7, 3) != complex_gaussian(6, 7, 3));
  CHECK(complex_gaussian(5, 7, 3, StreamTag::kCoefficient) != complex_gaussian(5, 7, 3, StreamTag::kPoint));
  CHECK(derive_seed(1, 2) != derive_seed(1, 3));
  CHECK(derive_seed(1, 2) == derive_seed(1, 2));
  CHECK(open_unit(0, 0) > 0.0);
  CHECK(open_unit(0xffffffff, 0xffffffff) == 1.0);
}

TEST_CASE("complex Gaussian moments") {
  const int n = 200000;
  double re = 0, im = 0, re2 = 0, im2 = 0, cross = 0;
  for (int i = 0; i < n; ++i) {
    const auto g = complex_gaussian(11, static_cast<std::uint64_t>(i), 0);
    re += g.real();
    im += g.imag();
    re2 += g.real() * g.real();
    im2 += g.imag() * g.imag();
    cross += g.real() * g.imag();
  }
  const double se = std::sqrt(0.5 / n);
  CHECK(std::abs(re / n) <= 4 * se);
  CHECK(std::abs(im / n) <= 4 * se);
  // Var of x^2 for x ~ N(0, 1/2) is 2 * (1/2)^2 = 1/2.
  CHECK(std::abs(re2 / n - 0.5) <= 4 * std::sqrt(0.5 / n));
  CHECK(std::abs(im2 / n - 0.5) <= 4 * std::sqrt(0.5 / n));
  CHECK(std::abs(cross / n) <= 4 * 0.5 / std::sqrt(n));
}

TEST_CASE("parallel_for output does not depend on the worker count") {
  auto fill = [](int workers) {
    std::vector<double> out(1000);
    parallel_for(out.size(), [&](std::size_t i) { out[i] = complex_gaussian(3, i, 1).real(); }, workers);
    return out;
  };
  const auto one = fill(1);
  CHECK(fill(2) == one);
  CHECK(fill(7) == one);
  CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) { if (i == 5) throw std::runtime_error("x"); }, 3),
                  std::runtime_error);
}
