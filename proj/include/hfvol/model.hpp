#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hfvol/errors.hpp"

namespace hfvol {

enum class NoiseKind { WhiteNoise, RieszKernel };

struct ModelParams {
  double kappa = 1.0;
  double lambda = 1.0;
  double alpha = 1.0;
  int dim = 1;
  NoiseKind noise_kind = NoiseKind::WhiteNoise;
};

// Returns p unchanged, or throws ConstraintViolation naming the first broken
// invariant.
ModelParams validate_params(const ModelParams& p);

// Same checks minus lambda > 0; the finite-difference simulator runs on
// [0, T] with an initial condition, where no damping is needed.
ModelParams validate_params_allow_zero_lambda(const ModelParams& p);

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double> column(std::size_t c) const;

  const std::vector<double>& data() const noexcept { return data_; }
  std::vector<double>& data() noexcept { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// One observation site; a single coordinate in d = 1.
using Site = std::vector<double>;

class SamplingScheme {
 public:
  SamplingScheme(double delta, double horizon, std::vector<Site> sites);

  // Convenience for d = 1.
  static SamplingScheme on_line(double delta, double horizon, std::vector<double> sites);

  double delta() const noexcept { return delta_; }
  double horizon() const noexcept { return horizon_; }
  const std::vector<Site>& sites() const noexcept { return sites_; }
  std::size_t num_sites() const noexcept { return sites_.size(); }
  std::size_t site_dim() const noexcept { return sites_.front().size(); }

  /// floor(T / delta): number of increments, one less than the number of rows.
  std::size_t num_increments() const noexcept { return num_increments_; }

  /// Coordinate of site m in d = 1.
  double site_x(std::size_t m) const { return sites_.at(m).at(0); }

  bool operator==(const SamplingScheme&) const = default;

 private:
  double delta_;
  double horizon_;
  std::vector<Site> sites_;
  std::size_t num_increments_;
};

/// Number of whole steps of size delta in [0, horizon], tolerant to the
/// rounding of horizon / delta.
std::size_t whole_steps(double horizon, double delta);

class ObservedPath {
 public:
  ObservedPath(SamplingScheme scheme, Matrix levels);

  const SamplingScheme& scheme() const noexcept { return scheme_; }
  const Matrix& levels() const noexcept { return levels_; }

  /// Same path with every level multiplied by c.
  ObservedPath scaled(double c) const;

  bool operator==(const ObservedPath&) const = default;

 private:
  SamplingScheme scheme_;
  Matrix levels_;
};

enum class MultipowerKind { AbsolutePower, SignedPower, SecondOrder, CorrSum };

std::string to_string(MultipowerKind kind);

// Weight matrix w (N x L) plus the functional family.
//
// SecondOrder stores p_m in column 0 and 0 in column 1: f_m = |x_m1 + x_m2|^p_m.
// CorrSum stores [1, 1] per site: f_m = x_m1 x_m2 + x_m1^2.
class MultipowerSpec {
 public:
  MultipowerSpec(Matrix weights, MultipowerKind kind);

  /// Phi(p): L = 1, same p at all N sites.
  static MultipowerSpec power(double p, std::size_t num_sites);
  /// Psi(w_1..w_L) with the same row at every site.
  static MultipowerSpec signed_power(const std::vector<double>& row, std::size_t num_sites);
  /// Phi(w_1..w_L) with the same row at every site.
  static MultipowerSpec multipower(const std::vector<double>& row, std::size_t num_sites);
  static MultipowerSpec second_order(double p, std::size_t num_sites);
  static MultipowerSpec corr_sum(std::size_t num_sites);

  const Matrix& weights() const noexcept { return weights_; }
  MultipowerKind kind() const noexcept { return kind_; }
  std::size_t lag_width() const noexcept { return weights_.cols(); }
  std::size_t num_sites() const noexcept { return weights_.rows(); }

  /// Total degree w_m of row m (homogeneity degree of f_m).
  double total_weight(std::size_t m) const;

  /// Row m as a one-site spec.
  MultipowerSpec site_row(std::size_t m) const;

  /// Same kind with every weight doubled (the functional estimating the
  /// integrated 2w-th power of the volatility).
  MultipowerSpec doubled() const;

  bool operator==(const MultipowerSpec&) const = default;

 private:
  Matrix weights_;
  MultipowerKind kind_;
};

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
  bool contains(double v) const noexcept { return lower <= v && v <= upper; }
  bool operator==(const Interval&) const = default;
};

struct EstimateReport {
  double estimate = 0.0;
  double variance_hat = 0.0;          // squared standard error of estimate
  std::optional<Interval> ci;         // absent when degenerate or suppressed
  double level = 0.95;
  std::optional<double> studentized;  // present when a reference value was supplied
  bool degenerate = false;
  std::vector<std::string> warnings;

  /// (estimate - value) / sqrt(variance_hat); the pivot the CI inverts.
  double studentize(double value) const;
};

/// Two-sided standard normal quantile for a confidence level in (0, 1).
double normal_two_sided_quantile(double level);
double normal_cdf(double x);
double normal_quantile(double prob);

/// Fills ci/studentized/degenerate from a point estimate and its standard error.
EstimateReport make_report(double estimate, double std_error, double level,
                           std::optional<double> reference);

}  // namespace hfvol
