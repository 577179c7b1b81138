#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <vector>

#include "kerrspring/polynomial.hpp"

using namespace kerrspring;

TEST_CASE("roots of a cubic with three real roots") {
  // (x - 1)(x - 2)(x - 3)
  const std::vector<double> c = {1.0, -6.0, 11.0, -6.0};
  const auto roots = real_polynomial_roots(c);
  REQUIRE(roots.size() == 3);
  CHECK(roots[0] == doctest::Approx(1.0));
  CHECK(roots[1] == doctest::Approx(2.0));
  CHECK(roots[2] == doctest::Approx(3.0));
}

TEST_CASE("complex pairs are filtered") {
  // (x - 2)(x^2 + 1)
  const std::vector<double> c = {1.0, -2.0, 1.0, -2.0};
  CHECK(polynomial_roots(c).size() == 3);
  const auto roots = real_polynomial_roots(c);
  REQUIRE(roots.size() == 1);
  CHECK(roots[0] == doctest::Approx(2.0));
}

TEST_CASE("leading zeros reduce the degree") {
  const std::vector<double> c = {0.0, 0.0, 2.0, -4.0};
  const auto roots = real_polynomial_roots(c);
  REQUIRE(roots.size() == 1);
  CHECK(roots[0] == doctest::Approx(2.0));
}

TEST_CASE("roots annihilate random polynomials") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::vector<double> r = {u(rng), u(rng), u(rng)};
    // Monic cubic from its roots.
    const std::vector<double> c = {1.0, -(r[0] + r[1] + r[2]),
                                   r[0] * r[1] + r[1] * r[2] + r[0] * r[2],
                                   -r[0] * r[1] * r[2]};
    for (const auto& z : polynomial_roots(c)) {
      std::complex<double> v = 0.0;
      for (double k : c) v = v * z + k;
      CHECK(std::abs(v) < 1e-9);
    }
  }
}

TEST_CASE("Horner evaluation") {
  const std::vector<double> c = {2.0, 0.0, -1.0};
  CHECK(evaluate_polynomial(c, 3.0) == doctest::Approx(17.0));
}
