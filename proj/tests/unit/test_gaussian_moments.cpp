#include <cmath>
#include <random>

#include "doctest.h"
#include "hfvol/gaussian_moments.hpp"

using namespace hfvol;

TEST_CASE("isserlis moments of a single variable") {
  Matrix cov(1, 1, 2.0);
  CHECK(gaussian_monomial_moment(cov, {2}) == doctest::Approx(2.0));
  CHECK(gaussian_monomial_moment(cov, {4}) == doctest::Approx(12.0));
  CHECK(gaussian_monomial_moment(cov, {6}) == doctest::Approx(120.0));
  CHECK(gaussian_monomial_moment(cov, {3}) == 0.0);
}

TEST_CASE("isserlis four-variable pairing sum") {
  Matrix cov(4, 4);
  const double c[4][4] = {{1.0, 0.3, -0.2, 0.1}, {0.3, 1.0, 0.25, -0.15}, {-0.2, 0.25, 1.0, 0.05}, {0.1, -0.15, 0.05, 1.0}};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) cov(i, j) = c[i][j];
  const double expected = c[0][1] * c[2][3] + c[0][2] * c[1][3] + c[0][3] * c[1][2];
  CHECK(gaussian_monomial_moment(cov, {1, 1, 1, 1}) == doctest::Approx(expected).epsilon(1e-14));
  // E[x0^2 x1^2] = c00 c11 + 2 c01^2.
  CHECK(gaussian_monomial_moment(cov, {2, 2, 0, 0}) == doctest::Approx(1.0 + 2.0 * 0.09).epsilon(1e-14));
}

TEST_CASE("polynomial moment is linear and matches Monte Carlo") {
  Matrix cov(2, 2);
  cov(0, 0) = 1.0;
  cov(1, 1) = 1.0;
  cov(0, 1) = cov(1, 0) = -0.4;
  const Polynomial p{{1.0, {1, 1}}, {1.0, {2, 0}}, {0.5, {2, 2}}};
  const double exact = gaussian_polynomial_moment(cov, p);
  CHECK(exact == doctest::Approx(-0.4 + 1.0 + 0.5 * (1.0 + 2.0 * 0.16)).epsilon(1e-14));
  std::mt19937_64 gen(7);
  std::normal_distribution<double> n;
  const int reps = 400000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < reps; ++i) {
    const double x = n(gen);
    const double y = -0.4 * x + std::sqrt(1.0 - 0.16) * n(gen);
    const double v = x * y + x * x + 0.5 * x * x * y * y;
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / reps;
  const double se = std::sqrt((sum2 / reps - mean * mean) / reps);
  CHECK(std::abs(mean - exact) < 4.0 * se);
}

TEST_CASE("shape mismatch is reported") {
  CHECK_THROWS_AS(gaussian_monomial_moment(Matrix(2, 2, 0.0), {1, 1, 0}), Error);
}
