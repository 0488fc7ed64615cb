#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "hfvol/model.hpp"

namespace hfvol {

struct SeriesTruncation {
  double abs_tol = 1e-12;
  std::size_t max_terms = 1'000'000;

  SeriesTruncation() = default;
  SeriesTruncation(double tol, std::size_t terms);
};

/// Entries of the change-of-frequency variance (C_11, C_12, C_22, C_0) and,
/// when requested for p = 2, the correlation-estimator family.
struct VarianceConstants {
  double c11 = 0.0;
  double c12 = 0.0;
  double c22 = 0.0;
  double c0 = 0.0;
  std::optional<double> tilde_c11;
  std::optional<double> tilde_c12;
  std::optional<double> tilde_c22;
  std::optional<double> tilde_c0;
};

/// Limiting lag-r correlation of normalized increments:
/// Gamma_0 = 1, Gamma_r = ((r+1)^e - 2 r^e + (r-1)^e) / 2 with e = 1 - alpha/2.
double gamma_weight(double alpha, std::size_t r);

/// Gamma_0..Gamma_{max_lag}.
std::vector<double> gamma_weights(double alpha, std::size_t max_lag);

/// Exact finite-delta lag-r correlation, a normalized second difference of
/// gamma(1 - alpha/2, lambda * r * delta).
double gamma_weight_n(double alpha, double lambda, double delta, std::size_t r);

/// Variance of one temporal increment of the unit-volatility stationary
/// solution. lambda = 0 returns the leading term (its limit).
double tau_sq_exact(const ModelParams& p, double delta);

/// Leading term of tau_sq_exact; independent of lambda.
double tau_sq_leading(const ModelParams& p, double delta);

/// Cov(Delta_i Y, Delta_{i+r} Y) = tau_n^2 Gamma_r^n for unit volatility.
double increment_autocovariance(const ModelParams& p, double delta, std::size_t r);

/// R_p = rho_p(1) + 2 sum_{r>=1} rho_p(Gamma_r).
double big_R(double p, double alpha, const SeriesTruncation& trunc = {});

/// mu_f(1, ..., 1) for a one-site spec (row m of a spec).
double mu_multipower(const MultipowerSpec& row_spec, double alpha);

/// rho_{f_a, f_b}(r; 1, ..., 1): covariance of f_a on lags 1..L_a with f_b on
/// lags 1+r..L_b+r, both one-site specs.
double rho_multipower(const MultipowerSpec& a, const MultipowerSpec& b, std::size_t r, double alpha);

/// rho_f = rho_{f,f}(0) + 2 sum_{r>=1} rho_{f,f}(r).
double rho_multipower_sum(const MultipowerSpec& f, double alpha, const SeriesTruncation& trunc = {});

/// Change-of-frequency constants for power p; tilde fields filled when p = 2.
VarianceConstants c0_constants(double p, double alpha, const SeriesTruncation& trunc = {});

/// Correlation-estimator constants (tilde fields only; c-fields left zero).
VarianceConstants c0_tilde_constants(double alpha, const SeriesTruncation& trunc = {});

/// 2^p Gamma((2p+1)/2) / sqrt(pi), as printed in the change-of-frequency
/// studentization. Numerically equal to mu_{2p}.
double cof_moment_constant(double p);

/// log of g(alpha) = pi^{d/2-alpha} Gamma(alpha/2) / ((2 kappa)^{alpha/2} (1 - alpha/2) Gamma(d/2)),
/// the prefactor of tau_sq_leading, and its derivative in alpha.
double log_leading_prefactor(double alpha, double kappa, int dim);
double log_leading_prefactor_derivative(double alpha, double kappa, int dim);

}  // namespace hfvol
