#include "hfvol/constants.hpp"

#include <algorithm>
#include <boost/math/special_functions/digamma.hpp>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <tuple>

#include "hfvol/errors.hpp"
#include "hfvol/gaussian_moments.hpp"
#include "hfvol/special_functions.hpp"

namespace hfvol {

SeriesTruncation::SeriesTruncation(double tol, std::size_t terms) : abs_tol(tol), max_terms(terms) {
  if (!(abs_tol > 0.0)) fail(ErrorCode::ConstraintViolation, "abs_tol > 0");
  if (max_terms < 10) fail(ErrorCode::ConstraintViolation, "max_terms >= 10");
}

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 2.0)) fail(ErrorCode::DomainError, "alpha must lie in (0, 2)");
}

void check_truncation(const SeriesTruncation& t) {
  if (!(t.abs_tol > 0.0)) fail(ErrorCode::ConstraintViolation, "abs_tol > 0");
  if (t.max_terms < 10) fail(ErrorCode::ConstraintViolation, "max_terms >= 10");
}

// Sums term(r) for r = start, start + 1, ... until two consecutive terms fall
// below abs_tol, then adds an integral estimate of the remaining power-law tail.
template <class Term>
double sum_series(Term&& term, std::size_t start, const SeriesTruncation& trunc, const char* what) {
  check_truncation(trunc);
  double sum = 0.0;
  double comp = 0.0;
  int small_run = 0;
  for (std::size_t k = 0; k < trunc.max_terms; ++k) {
    const std::size_t r = start + k;
    const double v = term(r);
    const double y = v - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
    small_run = std::abs(v) < trunc.abs_tol ? small_run + 1 : 0;
    if (small_run < 2 || r < 16) continue;
    const double t_half = term(r / 2);
    if (v != 0.0 && t_half != 0.0 && (v > 0) == (t_half > 0)) {
      const double s = std::log(t_half / v) / std::log(static_cast<double>(r) / static_cast<double>(r / 2));
      if (s > 1.05 && s < 50.0) {
        const double rr = static_cast<double>(r);
        sum += v * std::pow(rr, s) * std::pow(rr + 0.5, 1.0 - s) / (s - 1.0);
      }
    }
    return sum;
  }
  std::ostringstream os;
  os << what << " did not reach abs_tol " << trunc.abs_tol << " within " << trunc.max_terms << " terms";
  fail(ErrorCode::TruncationNotConverged, os.str());
}

// rho_p with arguments below 1e-13 treated as zero.
double rho_p(double p, double x) {
  if (std::abs(x) < 1e-13) return 0.0;
  return bivariate_abs_power_cov(p, x);
}

}  // namespace

double gamma_weight(double alpha, std::size_t r) {
  check_alpha(alpha);
  if (r == 0) return 1.0;
  const double e = 1.0 - 0.5 * alpha;
  const double rr = static_cast<double>(r);
  if (r < 8) return 0.5 * (std::pow(rr + 1.0, e) - 2.0 * std::pow(rr, e) + std::pow(rr - 1.0, e));
  // r^e sum_{k>=1} binom(e, 2k) r^{-2k}: avoids the cancellation of the
  // second difference at large r.
  const double inv2 = 1.0 / (rr * rr);
  double binom = 1.0;
  double power = 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 40; ++k) {
    const double j = 2.0 * k;
    binom *= (e - (j - 2.0)) * (e - (j - 1.0)) / ((j - 1.0) * j);
    power *= inv2;
    const double term = binom * power;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return std::pow(rr, e) * sum;
}

std::vector<double> gamma_weights(double alpha, std::size_t max_lag) {
  std::vector<double> g(max_lag + 1);
  for (std::size_t r = 0; r <= max_lag; ++r) g[r] = gamma_weight(alpha, r);
  return g;
}

double gamma_weight_n(double alpha, double lambda, double delta, std::size_t r) {
  check_alpha(alpha);
  if (!(delta > 0.0)) fail(ErrorCode::DomainError, "delta must be > 0");
  if (!(lambda >= 0.0)) fail(ErrorCode::DomainError, "lambda must be >= 0");
  if (r == 0) return 1.0;
  if (lambda == 0.0) return gamma_weight(alpha, r);
  const double a = 1.0 - 0.5 * alpha;
  const double rr = static_cast<double>(r);
  const double num = lower_incomplete_gamma(a, lambda * (rr + 1.0) * delta) -
                     2.0 * lower_incomplete_gamma(a, lambda * rr * delta) +
                     lower_incomplete_gamma(a, lambda * (rr - 1.0) * delta);
  return num / (2.0 * lower_incomplete_gamma(a, lambda * delta));
}

namespace {

// pi^{d/2-alpha} Gamma(alpha/2) / ((2 kappa)^{alpha/2} Gamma(d/2)).
double spectral_prefactor(const ModelParams& p) {
  const double d = static_cast<double>(p.dim);
  return std::exp((0.5 * d - p.alpha) * std::log(std::numbers::pi) + std::lgamma(0.5 * p.alpha) -
                  0.5 * p.alpha * std::log(2.0 * p.kappa) - std::lgamma(0.5 * d));
}

}  // namespace

double tau_sq_leading(const ModelParams& p, double delta) {
  validate_params_allow_zero_lambda(p);
  if (!(delta >= 0.0)) fail(ErrorCode::DomainError, "delta must be >= 0");
  const double e = 1.0 - 0.5 * p.alpha;
  return spectral_prefactor(p) / e * std::pow(delta, e);
}

double tau_sq_exact(const ModelParams& p, double delta) {
  validate_params_allow_zero_lambda(p);
  if (!(delta >= 0.0)) fail(ErrorCode::DomainError, "delta must be >= 0");
  if (p.lambda == 0.0) return tau_sq_leading(p, delta);
  const double e = 1.0 - 0.5 * p.alpha;
  return spectral_prefactor(p) / std::pow(p.lambda, e) * lower_incomplete_gamma(e, p.lambda * delta);
}

double increment_autocovariance(const ModelParams& p, double delta, std::size_t r) {
  return tau_sq_exact(p, delta) * gamma_weight_n(p.alpha, p.lambda, delta, r);
}

double big_R(double p, double alpha, const SeriesTruncation& trunc) {
  check_alpha(alpha);
  if (!(p >= 0.0)) fail(ErrorCode::DomainError, "power must be >= 0");
  const double head = bivariate_abs_power_cov(p, 1.0);
  const double tail = sum_series([&](std::size_t r) { return rho_p(p, gamma_weight(alpha, r)); }, 1, trunc, "R_p series");
  return head + 2.0 * tail;
}

namespace {

bool is_even_integer(double w) { return w == std::floor(w) && std::fmod(w, 2.0) == 0.0; }

// A one-site functional of L consecutive standard increments as either a
// polynomial or a product of absolute powers of linear forms.
struct Functional {
  std::size_t width = 0;
  std::optional<Polynomial> poly;
  // |sum_k forms[i][k] x_k|^powers[i], multiplied over i.
  std::vector<std::vector<double>> forms;
  std::vector<double> powers;
};

Polynomial binomial_expansion(unsigned p) {
  Polynomial poly;
  double c = 1.0;
  for (unsigned k = 0; k <= p; ++k) {
    poly.push_back({c, {static_cast<int>(p - k), static_cast<int>(k)}});
    c = c * (p - k) / (k + 1);
  }
  return poly;
}

Functional describe(const MultipowerSpec& spec) {
  if (spec.num_sites() != 1) fail(ErrorCode::SpecMismatch, "constants take a one-site spec row");
  Functional f;
  f.width = spec.lag_width();
  const auto w = spec.weights().row(0);
  switch (spec.kind()) {
    case MultipowerKind::SignedPower: {
      Monomial m{1.0, std::vector<int>(f.width)};
      for (std::size_t k = 0; k < f.width; ++k) m.exponents[k] = static_cast<int>(w[k]);
      f.poly = Polynomial{m};
      break;
    }
    case MultipowerKind::AbsolutePower: {
      const bool even = std::all_of(w.begin(), w.end(), [](double v) { return is_even_integer(v) && v <= 64.0; });
      if (even) {
        Monomial m{1.0, std::vector<int>(f.width)};
        for (std::size_t k = 0; k < f.width; ++k) m.exponents[k] = static_cast<int>(w[k]);
        f.poly = Polynomial{m};
      }
      for (std::size_t k = 0; k < f.width; ++k) {
        if (w[k] == 0.0) continue;
        std::vector<double> form(f.width, 0.0);
        form[k] = 1.0;
        f.forms.push_back(std::move(form));
        f.powers.push_back(w[k]);
      }
      break;
    }
    case MultipowerKind::SecondOrder: {
      const double p = w[0];
      if (is_even_integer(p) && p <= 64.0) f.poly = binomial_expansion(static_cast<unsigned>(p));
      if (p != 0.0) {
        f.forms.push_back({1.0, 1.0});
        f.powers.push_back(p);
      }
      break;
    }
    case MultipowerKind::CorrSum:
      f.poly = Polynomial{{1.0, {1, 1}}, {1.0, {2, 0}}};
      break;
  }
  return f;
}

Matrix lag_covariance(const std::vector<std::size_t>& lags, double alpha) {
  Matrix cov(lags.size(), lags.size());
  for (std::size_t i = 0; i < lags.size(); ++i)
    for (std::size_t j = 0; j < lags.size(); ++j) {
      const std::size_t d = lags[i] > lags[j] ? lags[i] - lags[j] : lags[j] - lags[i];
      cov(i, j) = gamma_weight(alpha, d);
    }
  return cov;
}

double quad_form(const std::vector<double>& a, const std::vector<double>& b, const std::vector<std::size_t>& la,
                 const std::vector<std::size_t>& lb, double alpha) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (b[j] == 0.0) continue;
      const std::size_t d = la[i] > lb[j] ? la[i] - lb[j] : lb[j] - la[i];
      s += a[i] * b[j] * gamma_weight(alpha, d);
    }
  }
  return s;
}

// log|E[|Z|^a He_k(Z)]| and its sign; sign 0 when the coefficient vanishes.
std::pair<double, int> log_abs_hermite_coeff(double a, std::size_t k) {
  if (k % 2 == 1) return {0.0, 0};
  double log_mag = std::log(gaussian_abs_moment(a));
  int sign = 1;
  for (std::size_t j = 0; j < k / 2; ++j) {
    const double f = a - 2.0 * static_cast<double>(j);
    if (f == 0.0) return {0.0, 0};
    log_mag += std::log(std::abs(f));
    if (f < 0.0) sign = -sign;
  }
  return {log_mag, sign};
}

// E[|X|^a |Y|^b |Z|^c] for standard normals with correlations r12, r13, r23,
// by the three-variable Hermite diagram expansion.
double trivariate_abs_moment(double a, double b, double c, double r12, double r13, double r23) {
  double total = 0.0;
  int quiet_shells = 0;
  for (std::size_t shell = 0; shell <= 600; ++shell) {
    double shell_sum = 0.0;
    for (std::size_t n12 = 0; n12 <= shell; ++n12) {
      for (std::size_t n13 = 0; n12 + n13 <= shell; ++n13) {
        const std::size_t n23 = shell - n12 - n13;
        const auto [la, sa] = log_abs_hermite_coeff(a, n12 + n13);
        const auto [lb, sb] = log_abs_hermite_coeff(b, n12 + n23);
        const auto [lc, sc] = log_abs_hermite_coeff(c, n13 + n23);
        if (sa == 0 || sb == 0 || sc == 0) continue;
        if ((n12 > 0 && r12 == 0.0) || (n13 > 0 && r13 == 0.0) || (n23 > 0 && r23 == 0.0)) continue;
        double log_term = la + lb + lc - std::lgamma(n12 + 1.0) - std::lgamma(n13 + 1.0) - std::lgamma(n23 + 1.0);
        int sign = sa * sb * sc;
        if (n12 > 0) {
          log_term += n12 * std::log(std::abs(r12));
          if (r12 < 0 && n12 % 2 == 1) sign = -sign;
        }
        if (n13 > 0) {
          log_term += n13 * std::log(std::abs(r13));
          if (r13 < 0 && n13 % 2 == 1) sign = -sign;
        }
        if (n23 > 0) {
          log_term += n23 * std::log(std::abs(r23));
          if (r23 < 0 && n23 % 2 == 1) sign = -sign;
        }
        shell_sum += sign * std::exp(log_term);
      }
    }
    total += shell_sum;
    if (shell > 0 && std::abs(shell_sum) < 1e-16 * std::max(1.0, std::abs(total))) {
      if (++quiet_shells >= 4) return total;
    } else {
      quiet_shells = 0;
    }
  }
  fail(ErrorCode::TruncationNotConverged, "trivariate Hermite expansion did not converge");
}

std::vector<std::size_t> iota_lags(std::size_t width, std::size_t offset) {
  std::vector<std::size_t> l(width);
  for (std::size_t k = 0; k < width; ++k) l[k] = offset + k;
  return l;
}

// Products of absolute powers of linear forms on the given lags.
std::optional<double> abs_forms_moment(const std::vector<std::vector<double>>& forms, const std::vector<double>& powers,
                                       const std::vector<std::vector<std::size_t>>& lags, double alpha) {
  const std::size_t n = forms.size();
  if (n == 0) return 1.0;
  if (n > 3) return std::nullopt;
  std::vector<double> scale(n);
  for (std::size_t i = 0; i < n; ++i) scale[i] = std::sqrt(quad_form(forms[i], forms[i], lags[i], lags[i], alpha));
  auto corr = [&](std::size_t i, std::size_t j) {
    return quad_form(forms[i], forms[j], lags[i], lags[j], alpha) / (scale[i] * scale[j]);
  };
  double scaling = 1.0;
  for (std::size_t i = 0; i < n; ++i) scaling *= std::pow(scale[i], powers[i]);
  if (n == 1) return scaling * gaussian_abs_moment(powers[0]);
  if (n == 2) return scaling * bivariate_abs_moment(powers[0], powers[1], corr(0, 1));
  return scaling * trivariate_abs_moment(powers[0], powers[1], powers[2], corr(0, 1), corr(0, 2), corr(1, 2));
}

// Maps a polynomial on local lags into a polynomial on the variable list.
Polynomial place(const Polynomial& p, const std::vector<std::size_t>& local_lags, const std::vector<std::size_t>& vars) {
  Polynomial out;
  for (const auto& m : p) {
    Monomial placed{m.coefficient, std::vector<int>(vars.size(), 0)};
    for (std::size_t k = 0; k < m.exponents.size(); ++k) {
      const auto it = std::find(vars.begin(), vars.end(), local_lags[k]);
      placed.exponents[static_cast<std::size_t>(it - vars.begin())] += m.exponents[k];
    }
    out.push_back(std::move(placed));
  }
  return out;
}

Polynomial multiply(const Polynomial& a, const Polynomial& b) {
  Polynomial out;
  for (const auto& x : a)
    for (const auto& y : b) {
      Monomial m{x.coefficient * y.coefficient, x.exponents};
      for (std::size_t k = 0; k < m.exponents.size(); ++k) m.exponents[k] += y.exponents[k];
      out.push_back(std::move(m));
    }
  return out;
}

std::vector<std::size_t> used_lags(const Polynomial& p, std::size_t offset) {
  std::vector<std::size_t> lags;
  for (const auto& m : p)
    for (std::size_t k = 0; k < m.exponents.size(); ++k)
      if (m.exponents[k] != 0) lags.push_back(offset + k);
  return lags;
}

}  // namespace

double mu_multipower(const MultipowerSpec& row_spec, double alpha) {
  check_alpha(alpha);
  const Functional f = describe(row_spec);
  if (row_spec.kind() == MultipowerKind::SecondOrder) {
    const double p = row_spec.weights()(0, 0);
    return gaussian_abs_moment(p) * std::pow(2.0 + 2.0 * gamma_weight(alpha, 1), 0.5 * p);
  }
  if (row_spec.kind() == MultipowerKind::CorrSum) return 1.0 + gamma_weight(alpha, 1);
  if (f.poly) {
    const auto lags = iota_lags(f.width, 0);
    return gaussian_polynomial_moment(lag_covariance(lags, alpha), *f.poly);
  }
  std::vector<std::vector<std::size_t>> lags(f.forms.size(), iota_lags(f.width, 0));
  if (auto v = abs_forms_moment(f.forms, f.powers, lags, alpha)) return *v;
  fail(ErrorCode::UnsupportedSpec, "no closed form for a multipower with more than three non-polynomial factors");
}

double rho_multipower(const MultipowerSpec& a, const MultipowerSpec& b, std::size_t r, double alpha) {
  check_alpha(alpha);
  const Functional fa = describe(a);
  const Functional fb = describe(b);
  if (fa.poly && fb.poly) {
    std::vector<std::size_t> vars = used_lags(*fa.poly, 0);
    const auto vb = used_lags(*fb.poly, r);
    vars.insert(vars.end(), vb.begin(), vb.end());
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
    if (vars.empty()) return 0.0;
    const Matrix cov = lag_covariance(vars, alpha);
    const Polynomial pa = place(*fa.poly, iota_lags(fa.width, 0), vars);
    const Polynomial pb = place(*fb.poly, iota_lags(fb.width, r), vars);
    return gaussian_polynomial_moment(cov, multiply(pa, pb)) -
           gaussian_polynomial_moment(cov, pa) * gaussian_polynomial_moment(cov, pb);
  }
  if (fa.forms.size() <= 1 && fb.forms.size() <= 1 && !(fa.forms.empty() && fb.forms.empty())) {
    if (fa.forms.empty() || fb.forms.empty()) return 0.0;
    const auto la = iota_lags(fa.width, 0);
    const auto lb = iota_lags(fb.width, r);
    const double sa = std::sqrt(quad_form(fa.forms[0], fa.forms[0], la, la, alpha));
    const double sb = std::sqrt(quad_form(fb.forms[0], fb.forms[0], lb, lb, alpha));
    const double corr = quad_form(fa.forms[0], fb.forms[0], la, lb, alpha) / (sa * sb);
    const double pa = fa.powers[0];
    const double pb = fb.powers[0];
    const double cov = bivariate_abs_moment(pa, pb, corr) - gaussian_abs_moment(pa) * gaussian_abs_moment(pb);
    return std::pow(sa, pa) * std::pow(sb, pb) * cov;
  }
  fail(ErrorCode::UnsupportedSpec,
       "cross-covariance needs polynomial functionals or single absolute powers of linear forms");
}

namespace {

struct RhoSumKey {
  std::vector<double> weights;
  MultipowerKind kind;
  double alpha;
  double tol;
  std::size_t terms;
  bool operator<(const RhoSumKey& o) const {
    return std::tie(weights, kind, alpha, tol, terms) < std::tie(o.weights, o.kind, o.alpha, o.tol, o.terms);
  }
};

}  // namespace

double rho_multipower_sum(const MultipowerSpec& f, double alpha, const SeriesTruncation& trunc) {
  check_alpha(alpha);
  check_truncation(trunc);
  static std::mutex mutex;
  static std::map<RhoSumKey, double> cache;
  const RhoSumKey key{f.weights().data(), f.kind(), alpha, trunc.abs_tol, trunc.max_terms};
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  const double head = rho_multipower(f, f, 0, alpha);
  const double tail = sum_series([&](std::size_t r) { return rho_multipower(f, f, r, alpha); }, 1, trunc, "rho_f series");
  const double value = head + 2.0 * tail;
  std::lock_guard lock(mutex);
  cache.emplace(key, value);
  return value;
}

VarianceConstants c0_tilde_constants(double alpha, const SeriesTruncation& trunc) {
  check_alpha(alpha);
  const double g1 = gamma_weight(alpha, 1);
  auto g = [&](std::size_t r) { return gamma_weight(alpha, r); };
  const double s11 = sum_series([&](std::size_t r) { return g(r) * g(r) + g(r + 1) * g(r - 1); }, 1, trunc, "C~11 series");
  const double s22 = sum_series([&](std::size_t r) { return g(r) * g(r); }, 1, trunc, "C~22 series");
  const double s12 = sum_series([&](std::size_t r) { return g(r) * (g(r + 1) + g(r - 1)); }, 1, trunc, "C~12 series");
  VarianceConstants c;
  c.tilde_c11 = 1.0 + g1 * g1 + 2.0 * s11;
  c.tilde_c22 = 2.0 + 4.0 * s22;
  c.tilde_c12 = 2.0 * g1 + 2.0 * s12;
  const double k = 2.0 / std::numbers::ln2;
  c.tilde_c0 = k * k * (*c.tilde_c11 - 2.0 * *c.tilde_c12 * g1 + *c.tilde_c22 * g1 * g1);
  return c;
}

VarianceConstants c0_constants(double p, double alpha, const SeriesTruncation& trunc) {
  check_alpha(alpha);
  if (!(p > 0.0)) fail(ErrorCode::DomainError, "power must be > 0");
  auto g = [&](std::size_t r) { return gamma_weight(alpha, r); };
  const double g1 = g(1);
  const double two_g = 2.0 + 2.0 * g1;
  const double root = std::sqrt(two_g);
  const double rho1 = bivariate_abs_power_cov(p, 1.0);

  VarianceConstants c;
  c.c11 = big_R(p, alpha, trunc);
  const double s22 =
      sum_series([&](std::size_t r) { return rho_p(p, (2.0 * g(r) + g(r - 1) + g(r + 1)) / two_g); }, 1, trunc, "C22 series");
  c.c22 = std::pow(two_g, p) * (rho1 + 2.0 * s22);
  const double s12a = sum_series([&](std::size_t r) { return rho_p(p, (g(r) + g(r - 1)) / root); }, 1, trunc, "C12 series");
  const double s12b = sum_series([&](std::size_t r) { return rho_p(p, (g(r) + g(r + 1)) / root); }, 1, trunc, "C12 series");
  c.c12 = std::pow(two_g, 0.5 * p) * (rho_p(p, std::sqrt(0.5 * (1.0 + g1))) + s12a + s12b);
  const double k = 4.0 / (p * std::numbers::ln2);
  c.c0 = k * k * (c.c11 - 2.0 * c.c12 / std::pow(two_g, 0.5 * p) + c.c22 / std::pow(two_g, p));
  if (p == 2.0) {
    const VarianceConstants t = c0_tilde_constants(alpha, trunc);
    c.tilde_c11 = t.tilde_c11;
    c.tilde_c12 = t.tilde_c12;
    c.tilde_c22 = t.tilde_c22;
    c.tilde_c0 = t.tilde_c0;
  }
  return c;
}

double cof_moment_constant(double p) {
  if (!(p >= 0.0)) fail(ErrorCode::DomainError, "power must be >= 0");
  return std::exp(p * std::numbers::ln2 + std::lgamma(p + 0.5)) / std::sqrt(std::numbers::pi);
}

double log_leading_prefactor(double alpha, double kappa, int dim) {
  check_alpha(alpha);
  const double d = static_cast<double>(dim);
  return (0.5 * d - alpha) * std::log(std::numbers::pi) + std::lgamma(0.5 * alpha) - 0.5 * alpha * std::log(2.0 * kappa) -
         std::log(1.0 - 0.5 * alpha) - std::lgamma(0.5 * d);
}

double log_leading_prefactor_derivative(double alpha, double kappa, int dim) {
  check_alpha(alpha);
  (void)dim;
  return -std::log(std::numbers::pi) + 0.5 * boost::math::digamma(0.5 * alpha) - 0.5 * std::log(2.0 * kappa) +
         0.5 / (1.0 - 0.5 * alpha);
}

}  // namespace hfvol
