#include "hfvol/variation.hpp"

#include <cmath>
#include <sstream>

namespace hfvol {

namespace {

class KahanSum {
 public:
  void add(double v) {
    const double y = v - carry_;
    const double t = sum_ + y;
    carry_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const noexcept { return sum_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

double abs_pow(double x, double w) {
  if (w == 0.0) return 1.0;
  if (x == 0.0) return 0.0;
  if (w == 2.0) return x * x;
  return std::pow(std::abs(x), w);
}

double int_pow(double x, double w) {
  const auto k = static_cast<int>(w);
  double r = 1.0;
  for (int j = 0; j < k; ++j) r *= x;
  return r;
}

}  // namespace

Matrix increments(const ObservedPath& path) {
  const Matrix& lv = path.levels();
  if (lv.rows() < 2) fail(ErrorCode::TooFewIncrements, "path needs at least 2 rows");
  Matrix out(lv.rows() - 1, lv.cols());
  for (std::size_t i = 0; i + 1 < lv.rows(); ++i)
    for (std::size_t m = 0; m < lv.cols(); ++m) out(i, m) = lv(i + 1, m) - lv(i, m);
  return out;
}

VariationResult variation(const ObservedPath& path, const MultipowerSpec& spec, double tau, bool with_partial) {
  if (!(tau > 0.0) || !std::isfinite(tau)) fail(ErrorCode::ConstraintViolation, "normalizer tau must be positive");
  const std::size_t sites = path.scheme().num_sites();
  if (spec.num_sites() != sites) {
    std::ostringstream os;
    os << "spec has " << spec.num_sites() << " rows but path has " << sites << " sites";
    fail(ErrorCode::SpecMismatch, os.str());
  }
  const Matrix dy = increments(path);
  const std::size_t lag = spec.lag_width();
  if (dy.rows() < lag) {
    std::ostringstream os;
    os << "need at least " << lag << " increments, path has " << dy.rows();
    fail(ErrorCode::TooFewIncrements, os.str());
  }
  const std::size_t terms = dy.rows() - lag + 1;
  const double delta = path.scheme().delta();
  const Matrix& w = spec.weights();

  VariationResult result{std::vector<double>(sites), std::nullopt, tau, spec};
  if (with_partial) result.partial = Matrix(terms, sites);

  std::vector<double> x(lag);
  for (std::size_t m = 0; m < sites; ++m) {
    KahanSum sum;
    for (std::size_t i = 0; i < terms; ++i) {
      for (std::size_t l = 0; l < lag; ++l) x[l] = dy(i + l, m) / tau;
      double f = 1.0;
      switch (spec.kind()) {
        case MultipowerKind::AbsolutePower:
          for (std::size_t l = 0; l < lag; ++l) f *= abs_pow(x[l], w(m, l));
          break;
        case MultipowerKind::SignedPower:
          for (std::size_t l = 0; l < lag; ++l) f *= int_pow(x[l], w(m, l));
          break;
        case MultipowerKind::SecondOrder:
          f = abs_pow(x[0] + x[1], w(m, 0));
          break;
        case MultipowerKind::CorrSum:
          f = x[0] * x[1] + x[0] * x[0];
          break;
      }
      sum.add(f);
      if (with_partial) (*result.partial)(i, m) = delta * sum.value();
    }
    result.per_site[m] = delta * sum.value();
  }
  return result;
}

std::vector<double> variation_ratio_cof(const ObservedPath& path, double p) {
  if (!(p > 0.0) || !std::isfinite(p)) fail(ErrorCode::ConstraintViolation, "p must be positive");
  const Matrix dy = increments(path);
  if (dy.rows() < 2) fail(ErrorCode::TooFewIncrements, "need at least 2 increments");
  std::vector<double> out(dy.cols());
  for (std::size_t m = 0; m < dy.cols(); ++m) {
    KahanSum num, den;
    for (std::size_t i = 0; i < dy.rows(); ++i) {
      den.add(abs_pow(dy(i, m), p));
      if (i + 1 < dy.rows()) num.add(abs_pow(dy(i, m) + dy(i + 1, m), p));
    }
    if (!(den.value() > 0.0)) {
      std::ostringstream os;
      os << "sum of |increment|^p vanishes at site " << m;
      fail(ErrorCode::DegenerateDenominator, os.str());
    }
    out[m] = num.value() / den.value();
  }
  return out;
}

}  // namespace hfvol
