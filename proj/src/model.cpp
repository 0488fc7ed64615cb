#include "hfvol/model.hpp"

#include <algorithm>
#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <set>
#include <sstream>

namespace hfvol {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConstraintViolation: return "ConstraintViolation";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::TruncationNotConverged: return "TruncationNotConverged";
    case ErrorCode::UnsupportedSpec: return "UnsupportedSpec";
    case ErrorCode::EmbeddingNotPSD: return "EmbeddingNotPSD";
    case ErrorCode::StabilityViolation: return "StabilityViolation";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::SpecMismatch: return "SpecMismatch";
    case ErrorCode::TooFewIncrements: return "TooFewIncrements";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::RatioOutOfDomain: return "RatioOutOfDomain";
    case ErrorCode::IrregularGrid: return "IrregularGrid";
    case ErrorCode::MissingValue: return "MissingValue";
    case ErrorCode::HeaderMalformed: return "HeaderMalformed";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

namespace {

void check_common(const ModelParams& p) {
  if (!(p.kappa > 0.0)) fail(ErrorCode::ConstraintViolation, "kappa > 0");
  if (p.dim < 1) fail(ErrorCode::ConstraintViolation, "dim >= 1");
  if (p.noise_kind == NoiseKind::WhiteNoise) {
    if (p.dim != 1) fail(ErrorCode::ConstraintViolation, "white noise requires dim = 1");
    if (p.alpha != 1.0) fail(ErrorCode::ConstraintViolation, "white noise fixes alpha = 1");
  }
  if (!(p.alpha > 0.0)) fail(ErrorCode::ConstraintViolation, "alpha > 0");
  if (!(p.alpha < 2.0)) fail(ErrorCode::ConstraintViolation, "alpha < 2");
  if (!(p.alpha <= static_cast<double>(p.dim))) fail(ErrorCode::ConstraintViolation, "alpha <= dim");
}

}  // namespace

ModelParams validate_params(const ModelParams& p) {
  check_common(p);
  if (!(p.lambda > 0.0)) fail(ErrorCode::ConstraintViolation, "lambda > 0");
  return p;
}

ModelParams validate_params_allow_zero_lambda(const ModelParams& p) {
  check_common(p);
  if (!(p.lambda >= 0.0)) fail(ErrorCode::ConstraintViolation, "lambda >= 0");
  return p;
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) fail(ErrorCode::SpecMismatch, "matrix data size does not match shape");
}

std::vector<double> Matrix::column(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

std::size_t whole_steps(double horizon, double delta) {
  const double ratio = horizon / delta;
  const double nearest = std::round(ratio);
  if (std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, ratio)) return static_cast<std::size_t>(nearest);
  return static_cast<std::size_t>(std::floor(ratio));
}

SamplingScheme::SamplingScheme(double delta, double horizon, std::vector<Site> sites)
    : delta_(delta), horizon_(horizon), sites_(std::move(sites)) {
  if (!(delta_ > 0.0) || !std::isfinite(delta_)) fail(ErrorCode::ConstraintViolation, "delta > 0");
  if (!(horizon_ >= delta_) || !std::isfinite(horizon_)) fail(ErrorCode::ConstraintViolation, "horizon >= delta");
  if (sites_.empty()) fail(ErrorCode::ConstraintViolation, "at least one site");
  const std::size_t d = sites_.front().size();
  for (const auto& s : sites_) {
    if (s.size() != d || d == 0) fail(ErrorCode::ConstraintViolation, "sites share one positive dimension");
    for (double c : s)
      if (!std::isfinite(c)) fail(ErrorCode::ConstraintViolation, "site coordinates finite");
  }
  std::sort(sites_.begin(), sites_.end());
  if (std::adjacent_find(sites_.begin(), sites_.end()) != sites_.end())
    fail(ErrorCode::ConstraintViolation, "sites pairwise distinct");
  num_increments_ = whole_steps(horizon_, delta_);
  if (num_increments_ < 2) fail(ErrorCode::ConstraintViolation, "floor(T/delta) >= 2");
}

SamplingScheme SamplingScheme::on_line(double delta, double horizon, std::vector<double> sites) {
  std::vector<Site> s;
  s.reserve(sites.size());
  for (double x : sites) s.push_back({x});
  return SamplingScheme(delta, horizon, std::move(s));
}

ObservedPath::ObservedPath(SamplingScheme scheme, Matrix levels)
    : scheme_(std::move(scheme)), levels_(std::move(levels)) {
  if (levels_.rows() != scheme_.num_increments() + 1)
    fail(ErrorCode::SpecMismatch, "level rows must equal floor(T/delta) + 1");
  if (levels_.cols() != scheme_.num_sites()) fail(ErrorCode::SpecMismatch, "level columns must equal site count");
  for (std::size_t r = 0; r < levels_.rows(); ++r)
    for (std::size_t c = 0; c < levels_.cols(); ++c)
      if (!std::isfinite(levels_(r, c))) {
        std::ostringstream os;
        os << "non-finite level at row " << r << ", column " << c;
        fail(ErrorCode::NonFiniteState, os.str());
      }
}

ObservedPath ObservedPath::scaled(double c) const {
  Matrix m = levels_;
  for (double& v : m.data()) v *= c;
  return ObservedPath(scheme_, std::move(m));
}

std::string to_string(MultipowerKind kind) {
  switch (kind) {
    case MultipowerKind::AbsolutePower: return "abs";
    case MultipowerKind::SignedPower: return "signed";
    case MultipowerKind::SecondOrder: return "second_order";
    case MultipowerKind::CorrSum: return "corr_sum";
  }
  return "unknown";
}

MultipowerSpec::MultipowerSpec(Matrix weights, MultipowerKind kind) : weights_(std::move(weights)), kind_(kind) {
  if (weights_.rows() == 0 || weights_.cols() == 0) fail(ErrorCode::SpecMismatch, "weights must be non-empty");
  for (double w : weights_.data()) {
    if (!(w >= 0.0) || !std::isfinite(w)) fail(ErrorCode::ConstraintViolation, "weights w_mk >= 0");
    if (kind_ == MultipowerKind::SignedPower && w != std::floor(w))
      fail(ErrorCode::ConstraintViolation, "signed multipower weights must be integers");
  }
  if (kind_ == MultipowerKind::SecondOrder || kind_ == MultipowerKind::CorrSum) {
    if (weights_.cols() != 2) fail(ErrorCode::ConstraintViolation, "second-order and corr-sum kinds fix L = 2");
  }
  if (kind_ == MultipowerKind::SecondOrder) {
    for (std::size_t m = 0; m < weights_.rows(); ++m)
      if (weights_(m, 1) != 0.0) fail(ErrorCode::ConstraintViolation, "second-order spec stores p in column 0 only");
  }
  if (kind_ == MultipowerKind::CorrSum) {
    for (double w : weights_.data())
      if (w != 1.0) fail(ErrorCode::ConstraintViolation, "corr-sum spec has unit weights");
  }
}

MultipowerSpec MultipowerSpec::power(double p, std::size_t num_sites) {
  return MultipowerSpec(Matrix(num_sites, 1, p), MultipowerKind::AbsolutePower);
}

namespace {
Matrix repeat_row(const std::vector<double>& row, std::size_t num_sites) {
  Matrix w(num_sites, row.size());
  for (std::size_t m = 0; m < num_sites; ++m)
    for (std::size_t k = 0; k < row.size(); ++k) w(m, k) = row[k];
  return w;
}
}  // namespace

MultipowerSpec MultipowerSpec::signed_power(const std::vector<double>& row, std::size_t num_sites) {
  return MultipowerSpec(repeat_row(row, num_sites), MultipowerKind::SignedPower);
}

MultipowerSpec MultipowerSpec::multipower(const std::vector<double>& row, std::size_t num_sites) {
  return MultipowerSpec(repeat_row(row, num_sites), MultipowerKind::AbsolutePower);
}

MultipowerSpec MultipowerSpec::second_order(double p, std::size_t num_sites) {
  return MultipowerSpec(repeat_row({p, 0.0}, num_sites), MultipowerKind::SecondOrder);
}

MultipowerSpec MultipowerSpec::corr_sum(std::size_t num_sites) {
  return MultipowerSpec(repeat_row({1.0, 1.0}, num_sites), MultipowerKind::CorrSum);
}

double MultipowerSpec::total_weight(std::size_t m) const {
  double s = 0.0;
  for (double w : weights_.row(m)) s += w;
  return kind_ == MultipowerKind::CorrSum ? 2.0 : s;
}

MultipowerSpec MultipowerSpec::site_row(std::size_t m) const {
  Matrix w(1, weights_.cols());
  for (std::size_t k = 0; k < weights_.cols(); ++k) w(0, k) = weights_(m, k);
  return MultipowerSpec(std::move(w), kind_);
}

MultipowerSpec MultipowerSpec::doubled() const {
  if (kind_ == MultipowerKind::CorrSum) fail(ErrorCode::UnsupportedSpec, "corr-sum has no doubled-weight form");
  Matrix w = weights_;
  for (double& v : w.data()) v *= 2.0;
  return MultipowerSpec(std::move(w), kind_);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double prob) {
  if (!(prob > 0.0 && prob < 1.0)) fail(ErrorCode::DomainError, "normal quantile needs prob in (0, 1)");
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * prob);
}

double normal_two_sided_quantile(double level) {
  if (!(level > 0.0 && level < 1.0)) fail(ErrorCode::DomainError, "confidence level must lie in (0, 1)");
  return normal_quantile(0.5 + 0.5 * level);
}

double EstimateReport::studentize(double value) const { return (estimate - value) / std::sqrt(variance_hat); }

EstimateReport make_report(double estimate, double std_error, double level, std::optional<double> reference) {
  EstimateReport r;
  r.estimate = estimate;
  r.level = level;
  const double z = normal_two_sided_quantile(level);
  if (!(std_error > 0.0) || !std::isfinite(std_error)) {
    r.degenerate = true;
    r.variance_hat = std::isfinite(std_error) ? std_error * std_error : 0.0;
    return r;
  }
  r.variance_hat = std_error * std_error;
  r.ci = Interval{estimate - z * std_error, estimate + z * std_error};
  if (reference) r.studentized = (estimate - *reference) / std_error;
  return r;
}

}  // namespace hfvol
