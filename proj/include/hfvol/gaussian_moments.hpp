#pragma once

#include <vector>

#include "hfvol/model.hpp"

namespace hfvol {

/// Monomial prod_i x_i^{exponents[i]} scaled by coefficient.
struct Monomial {
  double coefficient = 1.0;
  std::vector<int> exponents;
};

using Polynomial = std::vector<Monomial>;

/// E[prod_i x_i^{k_i}] for a centered Gaussian vector with covariance cov,
/// by the Isserlis (Wick) recursion with memoization.
double gaussian_monomial_moment(const Matrix& cov, const std::vector<int>& exponents);

/// E[P(x)] for a polynomial P of a centered Gaussian vector.
double gaussian_polynomial_moment(const Matrix& cov, const Polynomial& poly);

}  // namespace hfvol
