#include "hfvol/special_functions.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <shared_mutex>

#include "hfvol/errors.hpp"

namespace hfvol {

namespace {

constexpr double kRelTol = 1e-14;
constexpr int kMaxIter = 500;

// gamma(a, x) by its power series; valid and fast for x < a + 1.
double lower_gamma_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n <= kMaxIter; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * kRelTol) {
      return sum * std::exp(a * std::log(x) - x);
    }
  }
  fail(ErrorCode::TruncationNotConverged, "incomplete gamma series exceeded 500 terms");
}

// Gamma(a, x) by the Legendre continued fraction (modified Lentz).
double upper_gamma_continued_fraction(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kRelTol) {
      return std::exp(a * std::log(x) - x) * h;
    }
  }
  fail(ErrorCode::TruncationNotConverged, "incomplete gamma continued fraction exceeded 500 iterations");
}

}  // namespace

double lower_incomplete_gamma(double a, double x) {
  if (!(a > 0.0)) fail(ErrorCode::DomainError, "lower incomplete gamma needs a > 0");
  if (!(x >= 0.0)) fail(ErrorCode::DomainError, "lower incomplete gamma needs x >= 0");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return std::tgamma(a);
  if (x < a + 1.0) return lower_gamma_series(a, x);
  return std::tgamma(a) - upper_gamma_continued_fraction(a, x);
}

double gaussian_abs_moment(double p) {
  if (!(p >= 0.0)) fail(ErrorCode::DomainError, "absolute moment needs p >= 0");
  return std::exp(0.5 * p * std::numbers::ln2 + std::lgamma(0.5 * (p + 1.0))) / std::sqrt(std::numbers::pi);
}

namespace {

// Golub-Welsch eigenvalues of the Jacobi matrix as starting points, then
// Newton polishing on the orthonormal Hermite recurrence, which also yields
// weights with full relative accuracy in the tails.
QuadratureRule build_gauss_hermite(std::size_t order) {
  const int n = static_cast<int>(order);
  QuadratureRule rule;
  rule.order = order;
  rule.nodes.assign(order, 0.0);
  rule.weights.assign(order, 0.0);
  if (n == 1) {
    rule.weights[0] = std::sqrt(std::numbers::pi);
    return rule;
  }
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd off(n - 1);
  for (int k = 1; k < n; ++k) off[k - 1] = std::sqrt(0.5 * k);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, off, Eigen::EigenvaluesOnly);
  const double pim4 = 1.0 / std::pow(std::numbers::pi, 0.25);
  for (int i = 0; i < n; ++i) {
    double z = solver.eigenvalues()[i];
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = pim4;
      double p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double step = p1 / pp;
      z -= step;
      if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    rule.nodes[i] = z;
    rule.weights[i] = 2.0 / (pp * pp);
  }
  // Enforce exact symmetry.
  for (int i = 0; i < n / 2; ++i) {
    const double x = 0.5 * (rule.nodes[n - 1 - i] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[i] + rule.weights[n - 1 - i]);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace

std::shared_ptr<const QuadratureRule> gauss_hermite(std::size_t order) {
  if (order == 0) fail(ErrorCode::DomainError, "Gauss-Hermite order must be >= 1");
  static std::shared_mutex mutex;
  static std::map<std::size_t, std::shared_ptr<const QuadratureRule>> cache;
  {
    std::shared_lock lock(mutex);
    if (auto it = cache.find(order); it != cache.end()) return it->second;
  }
  auto rule = std::make_shared<const QuadratureRule>(build_gauss_hermite(order));
  std::unique_lock lock(mutex);
  return cache.emplace(order, std::move(rule)).first->second;
}

double abs_power_hermite_moment(double p, std::size_t n) {
  if (n % 2 == 1) return 0.0;
  double prod = gaussian_abs_moment(p);
  for (std::size_t j = 0; j < n / 2; ++j) prod *= (p - 2.0 * static_cast<double>(j));
  return prod;
}

double signed_power_hermite_moment(unsigned w, std::size_t n) {
  // E[Z^w He_n(Z)] = w!/(w-n)! E[Z^{w-n}] for n <= w with w - n even.
  if (n > w || (w - n) % 2 == 1) return 0.0;
  double falling = 1.0;
  for (std::size_t j = 0; j < n; ++j) falling *= static_cast<double>(w - j);
  double double_factorial = 1.0;  // (w-n-1)!!
  for (unsigned k = w - static_cast<unsigned>(n); k > 1; k -= 2) double_factorial *= (k - 1);
  return falling * double_factorial;
}

namespace {

// Tanh-sinh quadrature of f over [lo, hi]; f may have integrable endpoint
// singularities or kinks there.
double tanh_sinh(const std::function<double(double)>& f, double lo, double hi) {
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  const double t_max = 3.5;
  auto sample = [&](double t) {
    const double u = 0.5 * std::numbers::pi * std::sinh(t);
    const double ch = std::cosh(u);
    const double w = 0.5 * std::numbers::pi * std::cosh(t) / (ch * ch);
    const double x = mid + half * std::tanh(u);
    if (x <= lo || x >= hi) return 0.0;
    return w * f(x);
  };
  double h = 0.5;
  double sum = sample(0.0);
  for (double t = h; t <= t_max; t += h) sum += sample(t) + sample(-t);
  double estimate = sum * h * half;
  for (int level = 0; level < 10; ++level) {
    h *= 0.5;
    for (double t = h; t <= t_max; t += 2.0 * h) sum += sample(t) + sample(-t);
    const double refined = sum * h * half;
    if (std::abs(refined - estimate) <= 1e-15 * std::max(1.0, std::abs(refined)) && level >= 3) return refined;
    estimate = refined;
  }
  return estimate;
}

// E|X|^a|Y|^b through polar coordinates: the radial part is a Gamma moment,
// the angular part a periodic integral with kinks at the zeros of the cosines.
double bivariate_abs_moment_angular(double a, double b, double r) {
  const double phi = std::acos(std::clamp(r, -1.0, 1.0));
  const double pi = std::numbers::pi;
  auto integrand = [&](double theta) {
    return std::pow(std::abs(std::cos(theta)), a) * std::pow(std::abs(std::cos(theta - phi)), b);
  };
  std::vector<double> cuts{0.0, pi};
  for (double c : {0.5 * pi, std::fmod(phi + 0.5 * pi, pi)}) {
    if (c > 0.0 && c < pi) cuts.push_back(c);
  }
  std::sort(cuts.begin(), cuts.end());
  double angular = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] - cuts[i] > 1e-15) angular += tanh_sinh(integrand, cuts[i], cuts[i + 1]);
  }
  const double radial = std::exp(0.5 * (a + b) * std::numbers::ln2 + std::lgamma(0.5 * (a + b) + 1.0));
  return radial * angular / pi;
}

// sum_{k>=1} h_a(2k) h_b(2k) r^{2k} / (2k)!, the covariance of |X|^a and |Y|^b.
double bivariate_abs_cov_series(double a, double b, double r) {
  const double r2 = r * r;
  double ca = gaussian_abs_moment(a);
  double cb = gaussian_abs_moment(b);
  double coeff = ca * cb;  // h_a(2k) h_b(2k) / (2k)! at k = 0
  double power = 1.0;
  double sum = 0.0;
  for (int k = 0; k < 4000; ++k) {
    const double kk = static_cast<double>(k);
    coeff *= (a - 2.0 * kk) * (b - 2.0 * kk) / ((2.0 * kk + 1.0) * (2.0 * kk + 2.0));
    power *= r2;
    const double term = coeff * power;
    sum += term;
    if (coeff == 0.0) return sum;
    if (std::abs(term) < 1e-18 * std::max(1e-300, std::abs(sum))) return sum;
  }
  fail(ErrorCode::TruncationNotConverged, "bivariate Hermite series did not converge");
}

bool is_even_integer(double p) { return p == std::floor(p) && std::fmod(p, 2.0) == 0.0 && p <= 64.0; }

double clamp_correlation(double r) {
  if (!(std::abs(r) <= 1.0 + 1e-12)) fail(ErrorCode::DomainError, "correlation must lie in [-1, 1]");
  if (std::abs(r) >= 1.0 - 1e-12) return r > 0 ? 1.0 : -1.0;
  return r;
}

}  // namespace

double bivariate_abs_power_cov(double p, double r) {
  if (!(p >= 0.0)) fail(ErrorCode::DomainError, "power must be >= 0");
  r = clamp_correlation(r);
  if (p == 0.0 || r == 0.0) return 0.0;
  if (is_even_integer(p) || std::abs(r) <= 0.8) return bivariate_abs_cov_series(p, p, r);
  if (std::abs(r) == 1.0) {
    const double mp = gaussian_abs_moment(p);
    return gaussian_abs_moment(2.0 * p) - mp * mp;
  }
  const double mp = gaussian_abs_moment(p);
  return bivariate_abs_moment_angular(p, p, r) - mp * mp;
}

double bivariate_abs_moment(double a, double b, double r) {
  if (!(a >= 0.0) || !(b >= 0.0)) fail(ErrorCode::DomainError, "powers must be >= 0");
  r = clamp_correlation(r);
  const double base = gaussian_abs_moment(a) * gaussian_abs_moment(b);
  if (r == 0.0) return base;
  const bool polynomial = is_even_integer(a) || is_even_integer(b);
  if (polynomial || std::abs(r) <= 0.8) return base + bivariate_abs_cov_series(a, b, r);
  return bivariate_abs_moment_angular(a, b, r);
}

}  // namespace hfvol
