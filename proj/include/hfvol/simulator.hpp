#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hfvol/model.hpp"
#include "hfvol/rng.hpp"

namespace hfvol {

struct ConstantVol {
  double level = 1.0;
};

/// sigma(t) = base + amplitude * sin(2 pi frequency t + phase).
struct SinusoidVol {
  double base = 1.0;
  double amplitude = 0.5;
  double frequency = 1.0;
  double phase = 0.0;
};

/// sigma(t, x) = mean * exp(S(t, x) - eta^2 / (4 theta)), where S is a
/// Gaussian-smoothed field of independent OU processes with rate theta and
/// vol-of-vol eta, placed every length/4 in space.
struct OuFieldVol {
  double theta = 1.0;
  double eta = 0.5;
  double mean = 1.0;
  double length = 0.5;
};

/// sigma(y) = base + amplitude * tanh(y); bounded by base + |amplitude|.
struct TanhOfYVol {
  double base = 1.0;
  double amplitude = 0.5;
};

using VolatilityModel = std::variant<ConstantVol, SinusoidVol, OuFieldVol, TanhOfYVol>;

/// Throws ConstraintViolation if the model's invariants fail.
void validate_volatility(const VolatilityModel& vol);

std::string volatility_kind(const VolatilityModel& vol);

/// True when sigma does not depend on chance (constant or deterministic in time).
bool is_deterministic(const VolatilityModel& vol);

/// int_0^T sigma(s)^w ds for constant or time-deterministic models.
std::optional<double> deterministic_integrated_vol(const VolatilityModel& vol, double horizon, double w);

enum class Boundary { Dirichlet, Periodic };

/// Zero, or amplitude * exp(-(x - centre)^2 / (2 width^2)).
struct InitialCondition {
  double amplitude = 0.0;
  double centre = 0.0;
  double width = 1.0;

  bool is_zero() const noexcept { return amplitude == 0.0; }
  double operator()(double x) const;
};

struct FdGridConfig {
  double dt = 0.0;
  double dx = 0.0;
  double domain_length = 0.0;
  Boundary boundary = Boundary::Dirichlet;
  InitialCondition initial_condition;
  double burn_in = 0.0;
};

/// kappa dt / dx^2 at which the stationary increment variance of the
/// explicit scheme on an unbounded lattice matches tau_sq_exact.
///
/// Solved numerically from fd_lattice_increment_variance for the given
/// (kappa, lambda, delta, dt).
double fd_unbiased_mesh_ratio(const ModelParams& p, double delta, double dt);

/// Defaults for the FD scheme: dt = delta/16, dx from fd_unbiased_mesh_ratio
/// (adjusted so every site is a grid node), Dirichlet domain of length
/// 20 sqrt(kappa (T + burn_in)) and zero initial condition.
FdGridConfig default_fd_grid(const ModelParams& p, const SamplingScheme& scheme, double burn_in);

/// Throws StabilityViolation naming the first violated grid invariant.
void validate_fd_grid(const ModelParams& p, const SamplingScheme& scheme, const FdGridConfig& grid);

/// Stationary variance of one delta-increment of the explicit scheme on an
/// unbounded lattice with unit volatility (spectral integral over the
/// lattice Brillouin zone). Converges to tau_sq_exact as dt, dx -> 0.
double fd_lattice_increment_variance(const ModelParams& p, double delta, double dt, double dx);

/// Lag-r autocovariance of delta-increments on the same lattice.
double fd_lattice_increment_autocovariance(const ModelParams& p, double delta, double dt, double dx, std::size_t r);

/// Exact draw of the stationary increment sequence with variance
/// c^2 tau_n^2 and correlations Gamma_r^n at one site; levels start at 0.
ObservedPath simulate_exact_stationary(const ModelParams& p, const SamplingScheme& scheme, const VolatilityModel& sigma,
                                       const SeedSpec& seed);

/// The n increments themselves, drawn from stream.
std::vector<double> draw_stationary_increments(const ModelParams& p, double delta, std::size_t n, double scale,
                                               RandomStream& stream);

/// Path plus sigma(t_k, x_m) at every fine step t_k = k dt in [0, n delta).
struct FdSimulation {
  ObservedPath path;
  Matrix sigma_record;  // rows: fine steps, cols: sites
  double dt = 0.0;

  /// Left Riemann sum dt sum_k |sigma(t_k, x_m)|^w per site.
  std::vector<double> realized_integrated_vol(double w) const;
};

FdSimulation simulate_fd_recorded(const ModelParams& p, const SamplingScheme& scheme, const VolatilityModel& sigma,
                                  const FdGridConfig& grid, const SeedSpec& seed);

ObservedPath simulate_fd(const ModelParams& p, const SamplingScheme& scheme, const VolatilityModel& sigma,
                         const FdGridConfig& grid, const SeedSpec& seed);

}  // namespace hfvol
