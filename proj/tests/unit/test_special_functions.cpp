#include <cmath>
#include <functional>
#include <numbers>

#include "doctest.h"
#include "hfvol/errors.hpp"
#include "hfvol/special_functions.hpp"

using namespace hfvol;

namespace {

// Adaptive Simpson on [a, b].
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol, int depth = 0) {
  const double c = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fc = f(c);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fc + fb);
  const double d = 0.5 * (a + c), e = 0.5 * (c + b);
  const double left = (c - a) / 6.0 * (fa + 4.0 * f(d) + fc);
  const double right = (b - c) / 6.0 * (fc + 4.0 * f(e) + fb);
  if (depth > 40 || std::abs(left + right - whole) <= 15.0 * tol) return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, c, 0.5 * tol, depth + 1) + adaptive_simpson(f, c, b, 0.5 * tol, depth + 1);
}

// Tensor Gauss-Hermite estimate of Cov(|X|^p, |Y|^p); accurate only for
// reasonably smooth integrands.
double tensor_cov(double p, double r, std::size_t order) {
  const auto rule = gauss_hermite(order);
  const double s = std::sqrt(1.0 - r * r);
  double exy = 0.0;
  double ex = 0.0;
  for (std::size_t i = 0; i < order; ++i) {
    const double u = std::numbers::sqrt2 * rule->nodes[i];
    ex += rule->weights[i] * std::pow(std::abs(u), p);
    for (std::size_t j = 0; j < order; ++j) {
      const double v = std::numbers::sqrt2 * rule->nodes[j];
      exy += rule->weights[i] * rule->weights[j] * std::pow(std::abs(u), p) * std::pow(std::abs(r * u + s * v), p);
    }
  }
  ex /= std::sqrt(std::numbers::pi);
  exy /= std::numbers::pi;
  return exy - ex * ex;
}

}  // namespace

TEST_CASE("lower incomplete gamma examples") {
  CHECK(lower_incomplete_gamma(1.0, 1.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-13));
  CHECK(lower_incomplete_gamma(0.5, 0.25) == doctest::Approx(std::sqrt(std::numbers::pi) * std::erf(0.5)).epsilon(1e-13));
  CHECK(lower_incomplete_gamma(0.75, 0.0) == 0.0);
}

TEST_CASE("lower incomplete gamma against closed forms on a grid") {
  for (double x = 0.01; x <= 10.0 + 1e-12; x += 0.01) {
    const double g1 = lower_incomplete_gamma(1.0, x);
    const double gh = lower_incomplete_gamma(0.5, x);
    CHECK(std::abs(g1 - (1.0 - std::exp(-x))) <= 1e-12 * std::max(1.0, g1));
    CHECK(std::abs(gh - std::sqrt(std::numbers::pi) * std::erf(std::sqrt(x))) <= 1e-12 * std::max(1.0, gh));
  }
}

TEST_CASE("lower incomplete gamma against numerical integration") {
  for (double a : {0.55, 0.75, 0.95, 1.5, 3.0}) {
    for (double x : {0.05, 0.7, 2.5, 8.0}) {
      // Substitute u = v^{1/a} to remove the endpoint singularity.
      auto integrand = [a](double v) { return std::exp(-std::pow(v, 1.0 / a)) / a; };
      const double ref = adaptive_simpson(integrand, 0.0, std::pow(x, a), 1e-14);
      CHECK(lower_incomplete_gamma(a, x) == doctest::Approx(ref).epsilon(1e-10));
    }
  }
}

TEST_CASE("lower incomplete gamma is monotone and saturates") {
  double prev = 0.0;
  for (double x = 0.0; x < 40.0; x += 0.37) {
    const double v = lower_incomplete_gamma(0.6, x);
    CHECK(v >= prev);
    prev = v;
  }
  CHECK(lower_incomplete_gamma(0.6, 60.0) == doctest::Approx(std::tgamma(0.6)).epsilon(1e-14));
  CHECK(lower_incomplete_gamma(0.6, INFINITY) == doctest::Approx(std::tgamma(0.6)).epsilon(1e-14));
}

TEST_CASE("lower incomplete gamma domain errors") {
  CHECK_THROWS_AS(lower_incomplete_gamma(0.0, 1.0), Error);
  CHECK_THROWS_AS(lower_incomplete_gamma(1.0, -1.0), Error);
}

TEST_CASE("gaussian absolute moments") {
  CHECK(gaussian_abs_moment(2.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(gaussian_abs_moment(4.0) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(gaussian_abs_moment(1.0) == doctest::Approx(std::sqrt(2.0 / std::numbers::pi)).epsilon(1e-15));
  CHECK(gaussian_abs_moment(0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(gaussian_abs_moment(-1.0), Error);
  const auto rule = gauss_hermite(60);
  for (double p : {2.0, 6.0, 10.0}) {
    double q = 0.0;
    for (std::size_t i = 0; i < rule->order; ++i)
      q += rule->weights[i] * std::pow(std::abs(std::numbers::sqrt2 * rule->nodes[i]), p);
    CHECK(gaussian_abs_moment(p) == doctest::Approx(q / std::sqrt(std::numbers::pi)).epsilon(1e-12));
  }
}

TEST_CASE("gauss-hermite rules") {
  const auto one = gauss_hermite(1);
  CHECK(one->nodes[0] == 0.0);
  CHECK(one->weights[0] == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-14));
  const auto two = gauss_hermite(2);
  CHECK(two->nodes[0] == doctest::Approx(-1.0 / std::numbers::sqrt2).epsilon(1e-14));
  CHECK(two->nodes[1] == doctest::Approx(1.0 / std::numbers::sqrt2).epsilon(1e-14));
  CHECK(two->weights[0] == doctest::Approx(0.5 * std::sqrt(std::numbers::pi)).epsilon(1e-14));
  const auto five = gauss_hermite(5);
  double m2 = 0.0;
  for (std::size_t i = 0; i < 5; ++i) m2 += five->weights[i] * five->nodes[i] * five->nodes[i];
  CHECK(std::abs(m2 - 0.5 * std::sqrt(std::numbers::pi)) < 1e-13);
  CHECK_THROWS_AS(gauss_hermite(0), Error);
}

TEST_CASE("gauss-hermite structural invariants") {
  for (std::size_t order : {3, 10, 40, 100, 200}) {
    const auto rule = gauss_hermite(order);
    double sum = 0.0;
    for (std::size_t i = 0; i < order; ++i) {
      CHECK(rule->weights[i] > 0.0);
      if (i > 0) CHECK(rule->nodes[i] > rule->nodes[i - 1]);
      sum += rule->weights[i];
    }
    CHECK(std::abs(sum - std::sqrt(std::numbers::pi)) < 1e-12);
    // Exactness for x^{2k}: int x^{2k} e^{-x^2} = Gamma(k + 1/2).
    for (int k = 1; k < static_cast<int>(std::min<std::size_t>(order, 12)); ++k) {
      double q = 0.0;
      for (std::size_t i = 0; i < order; ++i) q += rule->weights[i] * std::pow(rule->nodes[i], 2 * k);
      CHECK(q == doctest::Approx(std::tgamma(k + 0.5)).epsilon(1e-12));
    }
  }
  CHECK(gauss_hermite(17) == gauss_hermite(17));
}

TEST_CASE("bivariate absolute power covariance examples") {
  CHECK(bivariate_abs_power_cov(2.0, 0.5) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(bivariate_abs_power_cov(4.0, 1.0) == doctest::Approx(96.0).epsilon(1e-13));
  CHECK(bivariate_abs_power_cov(2.0, 0.0) == 0.0);
  CHECK_THROWS_AS(bivariate_abs_power_cov(2.0, 1.5), Error);
}

TEST_CASE("even powers match the polynomial closed forms") {
  for (double r = -1.0; r <= 1.0 + 1e-12; r += 0.05) {
    CHECK(std::abs(bivariate_abs_power_cov(2.0, r) - 2.0 * r * r) <= 1e-10);
    CHECK(std::abs(bivariate_abs_power_cov(4.0, r) - (72.0 * r * r + 24.0 * std::pow(r, 4))) <= 1e-10);
  }
}

TEST_CASE("covariance is even in r and has the variance identity at r = 1") {
  for (double p : {0.5, 1.0, 1.5, 3.0, 4.5}) {
    for (double r : {0.1, 0.5, 0.79, 0.81, 0.95, 0.999}) {
      CHECK(std::abs(bivariate_abs_power_cov(p, r) - bivariate_abs_power_cov(p, -r)) <= 1e-9);
    }
    const double mp = gaussian_abs_moment(p);
    CHECK(std::abs(bivariate_abs_power_cov(p, 1.0) - (gaussian_abs_moment(2.0 * p) - mp * mp)) <= 1e-9);
  }
}

TEST_CASE("non-even powers agree with tensor quadrature where it is accurate") {
  // The tensor rule converges only algebraically across the kink of
  // |r u + s v|^p, so its accuracy improves with the smoothness p.
  for (double r : {0.3, 0.7, 0.85, 0.95}) {
    CHECK(bivariate_abs_power_cov(3.0, r) == doctest::Approx(tensor_cov(3.0, r, 200)).epsilon(5e-5));
    CHECK(bivariate_abs_power_cov(5.0, r) == doctest::Approx(tensor_cov(5.0, r, 200)).epsilon(1e-6));
    CHECK(bivariate_abs_power_cov(1.0, r) == doctest::Approx(tensor_cov(1.0, r, 200)).epsilon(2e-2));
  }
}

TEST_CASE("p = 1 covariance matches the arcsine closed form") {
  // E|XY| = (2/pi)(sqrt(1 - r^2) + r asin r).
  for (double r : {0.2, 0.6, 0.8, 0.9, 0.99}) {
    const double exy = 2.0 / std::numbers::pi * (std::sqrt(1.0 - r * r) + r * std::asin(r));
    CHECK(std::abs(bivariate_abs_power_cov(1.0, r) - (exy - 2.0 / std::numbers::pi)) <= 1e-10);
  }
}

TEST_CASE("series and angular branches agree across the switch point") {
  for (double p : {0.5, 1.5, 3.0}) {
    const double lo = bivariate_abs_power_cov(p, 0.8);
    const double hi = bivariate_abs_power_cov(p, 0.8 + 1e-12);
    CHECK(std::abs(lo - hi) <= 1e-10);
  }
  CHECK(bivariate_abs_moment(1.0, 3.0, 0.9) == doctest::Approx(bivariate_abs_moment(3.0, 1.0, 0.9)).epsilon(1e-11));
}

TEST_CASE("hermite coefficients") {
  CHECK(abs_power_hermite_moment(2.0, 2) == doctest::Approx(2.0));
  CHECK(abs_power_hermite_moment(2.0, 4) == 0.0);
  CHECK(abs_power_hermite_moment(1.0, 3) == 0.0);
  CHECK(signed_power_hermite_moment(3, 1) == doctest::Approx(3.0));
  CHECK(signed_power_hermite_moment(4, 2) == doctest::Approx(12.0));
  CHECK(signed_power_hermite_moment(4, 0) == doctest::Approx(3.0));
  CHECK(signed_power_hermite_moment(2, 1) == 0.0);
}
