#include <cmath>

#include "doctest.h"
#include "hfvol/constants.hpp"
#include "hfvol/simulator.hpp"
#include "hfvol/variation.hpp"

using namespace hfvol;

namespace {

ObservedPath path_from_increments(const std::vector<std::vector<double>>& inc, double delta) {
  const std::size_t n = inc.front().size(), sites = inc.size();
  Matrix lv(n + 1, sites);
  for (std::size_t m = 0; m < sites; ++m)
    for (std::size_t i = 0; i < n; ++i) lv(i + 1, m) = lv(i, m) + inc[m][i];
  std::vector<double> xs;
  for (std::size_t m = 0; m < sites; ++m) xs.push_back(static_cast<double>(m));
  return ObservedPath(SamplingScheme::on_line(delta, delta * static_cast<double>(n), xs), lv);
}

ObservedPath random_path(std::uint64_t seed, std::size_t n, std::size_t sites) {
  auto s = derive_stream({seed, 0});
  StandardNormal z;
  std::vector<std::vector<double>> inc(sites, std::vector<double>(n));
  for (auto& col : inc)
    for (auto& v : col) v = z(s);
  return path_from_increments(inc, 1.0 / static_cast<double>(n));
}

}  // namespace

TEST_CASE("increments of small paths") {
  const auto p = ObservedPath(SamplingScheme::on_line(0.5, 1.0, {0.0}), Matrix(3, 1, {0.0, 1.0, 3.0}));
  const Matrix d = increments(p);
  CHECK(d.rows() == 2);
  CHECK(d(0, 0) == 1.0);
  CHECK(d(1, 0) == 2.0);
  const auto flat = ObservedPath(SamplingScheme::on_line(0.5, 1.0, {0.0}), Matrix(3, 1, 4.0));
  const Matrix zero = increments(flat);
  for (double v : zero.data()) CHECK(v == 0.0);
}

TEST_CASE("variation arithmetic examples") {
  const auto p = path_from_increments({{1.0, -1.0, 2.0}}, 0.1);
  CHECK(variation(p, MultipowerSpec::power(2.0, 1), 1.0).per_site[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(variation(p, MultipowerSpec::signed_power({1.0, 1.0}, 1), 1.0).per_site[0] ==
        doctest::Approx(-0.3).epsilon(1e-15));
  CHECK(variation(p, MultipowerSpec::second_order(2.0, 1), 1.0).per_site[0] == doctest::Approx(0.1 * (0.0 + 1.0)));
  CHECK(variation(p, MultipowerSpec::corr_sum(1), 1.0).per_site[0] == doctest::Approx(0.1 * (-1.0 + 1.0 - 2.0 + 1.0)));
  CHECK(variation(p, MultipowerSpec::multipower({1.0, 1.0, 1.0}, 1), 1.0).per_site[0] == doctest::Approx(0.2));
}

TEST_CASE("variation validation") {
  const auto p = path_from_increments({{1.0, -1.0}}, 0.1);
  auto code = [&](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidConfig;
  };
  CHECK(code([&] { variation(p, MultipowerSpec::power(2.0, 2), 1.0); }) == ErrorCode::SpecMismatch);
  CHECK(code([&] { variation(p, MultipowerSpec::multipower({1.0, 1.0, 1.0}, 1), 1.0); }) ==
        ErrorCode::TooFewIncrements);
  CHECK(code([&] { variation(p, MultipowerSpec::power(2.0, 1), 0.0); }) == ErrorCode::ConstraintViolation);
  const auto zero = path_from_increments({{0.0, 0.0, 0.0}}, 0.1);
  CHECK(code([&] { variation_ratio_cof(zero, 2.0); }) == ErrorCode::DegenerateDenominator);
}

TEST_CASE("law of large numbers for the exact simulator") {
  ModelParams p;
  const double delta = std::ldexp(1.0, -14);
  const auto scheme = SamplingScheme::on_line(delta, 1.0, {0.0});
  const auto path = simulate_exact_stationary(p, scheme, ConstantVol{1.0}, {21, 0});
  const double v = variation(path, MultipowerSpec::power(2.0, 1), std::sqrt(tau_sq_exact(p, delta))).per_site[0];
  CHECK(std::abs(v - 1.0) < 0.02);
}

TEST_CASE("homogeneity and normalizer algebra") {
  const auto path = random_path(3, 400, 2);
  const std::vector<MultipowerSpec> specs{
      MultipowerSpec::power(1.5, 2),
      MultipowerSpec::multipower({2.0 / 3, 2.0 / 3, 2.0 / 3}, 2),
      MultipowerSpec(Matrix(2, 2, {1.0, 0.5, 0.0, 3.0}), MultipowerKind::AbsolutePower),
      MultipowerSpec::signed_power({1.0, 2.0}, 2),
      MultipowerSpec::second_order(3.0, 2),
  };
  for (const auto& spec : specs) {
    for (double c : {0.3, 7.0}) {
      const auto base = variation(path, spec, 1.0).per_site;
      const auto scaled = variation(path.scaled(c), spec, 1.0).per_site;
      const auto normed = variation(path, spec, c).per_site;
      for (std::size_t m = 0; m < 2; ++m) {
        const double w = spec.total_weight(m);
        CHECK(scaled[m] == doctest::Approx(std::pow(c, w) * base[m]).epsilon(1e-12));
        CHECK(normed[m] == doctest::Approx(base[m] / std::pow(c, w)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("even signed weights equal absolute weights") {
  const auto path = random_path(4, 300, 1);
  const auto psi = variation(path, MultipowerSpec::signed_power({2.0, 4.0}, 1), 1.0).per_site[0];
  const auto phi = variation(path, MultipowerSpec::multipower({2.0, 4.0}, 1), 1.0).per_site[0];
  CHECK(psi == doctest::Approx(phi).epsilon(1e-12));
}

TEST_CASE("partial sums are nondecreasing and end at the total") {
  const auto path = random_path(5, 200, 2);
  const auto r = variation(path, MultipowerSpec::multipower({1.0, 0.5}, 2), 1.0, true);
  REQUIRE(r.partial);
  CHECK(r.partial->rows() == 199);
  for (std::size_t m = 0; m < 2; ++m) {
    for (std::size_t i = 1; i < r.partial->rows(); ++i) CHECK((*r.partial)(i, m) >= (*r.partial)(i - 1, m));
    CHECK((*r.partial)(r.partial->rows() - 1, m) == r.per_site[m]);
  }
}

TEST_CASE("change-of-frequency ratio is scale free") {
  const auto path = random_path(6, 500, 3);
  const auto a = variation_ratio_cof(path, 2.0);
  const auto b = variation_ratio_cof(path.scaled(13.0), 2.0);
  for (std::size_t m = 0; m < 3; ++m) CHECK(a[m] == doctest::Approx(b[m]).epsilon(1e-12));
  // Independent increments: E|Z1 + Z2|^2 / E|Z|^2 = 2.
  CHECK(a[0] == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("zero increments with fractional power contribute zero") {
  const auto path = path_from_increments({{0.0, 1.0}}, 0.5);
  CHECK(variation(path, MultipowerSpec::power(0.5, 1), 1.0).per_site[0] == 0.5);
}
