#pragma once

#include <cstddef>
#include <memory>
#include <vector>

namespace hfvol {

/// Nodes and weights for integrals against exp(-x^2) over the real line.
struct QuadratureRule {
  std::vector<double> nodes;  // strictly increasing
  std::vector<double> weights;
  std::size_t order = 0;
};

/// gamma(a, x) = int_0^x e^{-u} u^{a-1} du.
///
/// Series for x < a + 1, Lentz continued fraction for the upper function
/// otherwise. Throws DomainError for a <= 0 or x < 0 and
/// TruncationNotConverged past 500 iterations.
double lower_incomplete_gamma(double a, double x);

/// E|Z|^p for Z ~ N(0, 1).
double gaussian_abs_moment(double p);

/// Gauss-Hermite rule of the given order. Rules are memoized per order and
/// safe to request from several threads.
std::shared_ptr<const QuadratureRule> gauss_hermite(std::size_t order);

/// E[|Z|^p He_n(Z)] for the probabilists' Hermite polynomial He_n.
/// Zero for odd n; mu_p * prod_{j<n/2} (p - 2j) for even n.
double abs_power_hermite_moment(double p, std::size_t n);

/// E[Z^w He_n(Z)] for integer w >= 0.
double signed_power_hermite_moment(unsigned w, std::size_t n);

/// rho_p(r) = Cov(|X|^p, |Y|^p) for a standard bivariate normal pair with
/// correlation r.
///
/// Even integer p: terminating Hermite expansion (exact polynomial).
/// |r| <= 0.8: Hermite expansion mu_p^2 sum_k c_k r^{2k}.
/// Otherwise: E|X|^p|Y|^p reduced to a one-dimensional angular integral,
/// split at the kinks and integrated with tanh-sinh.
double bivariate_abs_power_cov(double p, double r);

/// E[|X|^a |Y|^b] for a standard bivariate normal pair with correlation r.
double bivariate_abs_moment(double a, double b, double r);

}  // namespace hfvol
