#include "hfvol/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "hfvol/constants.hpp"
#include "hfvol/variation.hpp"

namespace hfvol {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

double clip_alpha(double a) { return std::clamp(a, kAlphaClipLow, kAlphaClipHigh); }

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0)) fail(ErrorCode::ConstraintViolation, "level must lie in (0, 1)");
}

AlphaEstimate finish_alpha(AlphaMethod method, std::vector<double> per_site, double se_factor_sq, double level,
                           std::optional<double> reference, std::vector<std::string> warnings) {
  const double est = mean(per_site);
  AlphaEstimate out{make_report(est, std::sqrt(se_factor_sq), level, reference), method, std::move(per_site),
                    clip_alpha(est)};
  if (est != out.clipped) {
    std::ostringstream os;
    os << "alpha estimate " << est << " clipped to " << out.clipped << " for the variance constants";
    warnings.push_back(os.str());
  }
  out.report.warnings = std::move(warnings);
  return out;
}

// Common standard-error factor of the alpha estimators:
// se^2 = delta C / (K N^2) * sum_m V_num_m / V_den_m^2.
double alpha_variance(double delta, double c0, double k, std::size_t n_sites, const std::vector<double>& num,
                      const std::vector<double>& den) {
  double s = 0.0;
  for (std::size_t m = 0; m < num.size(); ++m) {
    if (!(den[m] != 0.0)) return 0.0;
    s += num[m] / (den[m] * den[m]);
  }
  const double n = static_cast<double>(n_sites);
  return delta * c0 / k * s / (n * n);
}

bool clt_weight_ok(double w) { return w == 0.0 || w == 2.0 || w >= 4.0; }

}  // namespace

std::string method_name(const AlphaMethod& method) {
  return std::visit(Overloaded{[](const ChangeOfFrequency&) { return std::string("change_of_frequency"); },
                               [](const CorrelationRatio&) { return std::string("correlation_ratio"); }},
                    method);
}

AlphaEstimate estimate_alpha_cof(const ObservedPath& path, double p, double level, std::optional<double> reference) {
  check_level(level);
  const auto ratio = variation_ratio_cof(path, p);
  const std::size_t n = ratio.size();
  std::vector<double> per_site(n);
  for (std::size_t m = 0; m < n; ++m) per_site[m] = 2.0 - 4.0 / p * std::log2(ratio[m]);

  std::vector<std::string> warnings;
  if (!(p == 2.0 || p >= 4.0)) {
    std::ostringstream os;
    os << "CltHypothesisWarning: the change-of-frequency CLT needs p = 2 or p >= 4, got p = " << p;
    warnings.push_back(os.str());
  }
  const double alpha_c = clip_alpha(mean(per_site));
  const auto v_p = variation(path, MultipowerSpec::power(p, n), 1.0).per_site;
  const auto v_2p = variation(path, MultipowerSpec::power(2.0 * p, n), 1.0).per_site;
  const double c0 = c0_constants(p, alpha_c).c0;
  const double var = alpha_variance(path.scheme().delta(), c0, cof_moment_constant(p), n, v_2p, v_p);
  return finish_alpha(ChangeOfFrequency{p}, std::move(per_site), var, level, reference, std::move(warnings));
}

AlphaEstimate estimate_alpha_corr(const ObservedPath& path, double level, std::optional<double> reference) {
  check_level(level);
  const std::size_t n = path.scheme().num_sites();
  const auto psi = variation(path, MultipowerSpec::signed_power({1.0, 1.0}, n), 1.0).per_site;
  const auto phi = variation(path, MultipowerSpec::power(2.0, n), 1.0).per_site;
  std::vector<double> per_site(n);
  for (std::size_t m = 0; m < n; ++m) {
    if (!(phi[m] > 0.0)) {
      std::ostringstream os;
      os << "V_Phi(2) vanishes at site " << m;
      fail(ErrorCode::DegenerateDenominator, os.str());
    }
    const double r = psi[m] / phi[m];
    if (!(r > -1.0)) {
      std::ostringstream os;
      os << "correlation ratio " << r << " <= -1 at site " << m;
      fail(ErrorCode::RatioOutOfDomain, os.str());
    }
    per_site[m] = -2.0 * std::log2(1.0 + r);
  }
  const double alpha_c = clip_alpha(mean(per_site));
  const auto v4 = variation(path, MultipowerSpec::power(4.0, n), 1.0).per_site;
  const auto vs = variation(path, MultipowerSpec::corr_sum(n), 1.0).per_site;
  const double c0 = *c0_tilde_constants(alpha_c).tilde_c0;
  const double var = alpha_variance(path.scheme().delta(), c0, 3.0, n, v4, vs);
  return finish_alpha(CorrelationRatio{}, std::move(per_site), var, level, reference, {});
}

AlphaEstimate estimate_alpha(const ObservedPath& path, const AlphaMethod& method, double level,
                             std::optional<double> reference) {
  return std::visit(
      Overloaded{[&](const ChangeOfFrequency& c) { return estimate_alpha_cof(path, c.p, level, reference); },
                 [&](const CorrelationRatio&) { return estimate_alpha_corr(path, level, reference); }},
      method);
}

bool satisfies_clt_weights(const MultipowerSpec& spec) {
  const Matrix& w = spec.weights();
  switch (spec.kind()) {
    case MultipowerKind::AbsolutePower:
      return std::all_of(w.data().begin(), w.data().end(), clt_weight_ok);
    case MultipowerKind::SignedPower:
      for (std::size_t m = 0; m < spec.num_sites(); ++m)
        if (std::fmod(spec.total_weight(m), 2.0) != 0.0) return false;
      return true;
    case MultipowerKind::SecondOrder:
      for (std::size_t m = 0; m < spec.num_sites(); ++m)
        if (!clt_weight_ok(w(m, 0))) return false;
      return true;
    case MultipowerKind::CorrSum:
      return true;
  }
  return false;
}

namespace {

struct SiteMoments {
  double mu = 0.0;
  double mu_doubled = 0.0;
  std::optional<double> rho;
};

SiteMoments site_moments(const MultipowerSpec& row, double alpha, std::vector<std::string>& warnings,
                         std::size_t m) {
  SiteMoments s;
  s.mu = mu_multipower(row, alpha);
  if (!(s.mu != 0.0)) {
    std::ostringstream os;
    os << "mu of the functional at site " << m << " is zero; its variation does not estimate a volatility";
    fail(ErrorCode::DomainError, os.str());
  }
  try {
    s.mu_doubled = mu_multipower(row.doubled(), alpha);
    s.rho = rho_multipower_sum(row, alpha);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::UnsupportedSpec) throw;
    std::ostringstream os;
    os << "CI suppressed at site " << m << ": " << e.what();
    warnings.push_back(os.str());
  }
  return s;
}

std::optional<double> reference_at(const std::vector<double>& refs, std::size_t m) {
  if (m < refs.size()) return refs[m];
  return std::nullopt;
}

void check_references(const std::vector<double>& refs, std::size_t n) {
  if (!refs.empty() && refs.size() != n) fail(ErrorCode::SpecMismatch, "references must have one value per site");
}

}  // namespace

VolatilityEstimate estimate_vol_normalized(const ObservedPath& path, const MultipowerSpec& spec, double alpha,
                                           double tau, double level, const std::vector<double>& references) {
  check_level(level);
  const std::size_t n = path.scheme().num_sites();
  if (spec.num_sites() != n) fail(ErrorCode::SpecMismatch, "spec rows must match path sites");
  check_references(references, n);
  if (!(alpha > 0.0 && alpha < 2.0)) fail(ErrorCode::ConstraintViolation, "alpha must lie in (0, 2)");

  VolatilityEstimate out;
  out.alpha_used = alpha;
  out.rate = RateTag::Root;
  const bool clt_ok = satisfies_clt_weights(spec);
  if (!clt_ok) out.warnings.push_back("CltHypothesisWarning: weights outside the CLT range; CI suppressed");

  const double delta = path.scheme().delta();
  const auto v = variation(path, spec, tau).per_site;
  const auto v2 = variation(path, spec.doubled(), tau).per_site;
  for (std::size_t m = 0; m < n; ++m) {
    const SiteMoments s = site_moments(spec.site_row(m), alpha, out.warnings, m);
    const double est = v[m] / s.mu;
    if (!clt_ok || !s.rho) {
      EstimateReport r;
      r.estimate = est;
      r.level = level;
      out.per_site.push_back(r);
      continue;
    }
    const double se = std::sqrt(delta * *s.rho / (s.mu * s.mu) * v2[m] / s.mu_doubled);
    out.per_site.push_back(make_report(est, se, level, reference_at(references, m)));
  }
  return out;
}

VolatilityEstimate estimate_vol_known_alpha(const ObservedPath& path, const MultipowerSpec& spec, double alpha,
                                            double kappa, int dim, double level,
                                            const std::vector<double>& references) {
  if (!(alpha > 0.0 && alpha < 2.0)) fail(ErrorCode::ConstraintViolation, "alpha must lie in (0, 2)");
  if (!(kappa > 0.0)) fail(ErrorCode::ConstraintViolation, "kappa must be positive");
  if (dim < 1) fail(ErrorCode::ConstraintViolation, "dim must be positive");
  const double delta = path.scheme().delta();
  const double tau = std::sqrt(std::exp(log_leading_prefactor(alpha, kappa, dim)) * std::pow(delta, 1.0 - alpha / 2.0));
  return estimate_vol_normalized(path, spec, alpha, tau, level, references);
}

VolatilityEstimate estimate_vol_unknown_alpha(const ObservedPath& path, const MultipowerSpec& spec, double kappa,
                                              const AlphaMode& mode, int dim, double level,
                                              UnknownAlphaScaling scaling, const std::vector<double>& references) {
  if (const auto* known = std::get_if<KnownAlpha>(&mode))
    return estimate_vol_known_alpha(path, spec, known->alpha, kappa, dim, level, references);

  check_level(level);
  const std::size_t n = path.scheme().num_sites();
  if (spec.num_sites() != n) fail(ErrorCode::SpecMismatch, "spec rows must match path sites");
  check_references(references, n);
  if (!(kappa > 0.0)) fail(ErrorCode::ConstraintViolation, "kappa must be positive");
  if (dim < 1) fail(ErrorCode::ConstraintViolation, "dim must be positive");

  const AlphaMethod& method = std::get<AlphaMethod>(mode);
  if (const auto* cof = std::get_if<ChangeOfFrequency>(&method); cof && !(cof->p == 2.0 || cof->p >= 4.0)) {
    std::ostringstream os;
    os << "unknown-alpha volatility CLT needs p0 = 2 or p0 >= 4, got " << cof->p;
    fail(ErrorCode::ConstraintViolation, os.str());
  }

  VolatilityEstimate out;
  out.alpha_estimate = estimate_alpha(path, method, level);
  const double alpha_n = out.alpha_estimate->clipped;
  out.alpha_used = alpha_n;
  out.rate = RateTag::RootLog;
  out.warnings = out.alpha_estimate->report.warnings;
  const bool clt_ok = satisfies_clt_weights(spec);
  if (!clt_ok) out.warnings.push_back("CltHypothesisWarning: weights outside the CLT range; CI suppressed");

  const double delta = path.scheme().delta();
  const double log_delta = std::abs(std::log(delta));
  double slope = log_delta;
  if (scaling == UnknownAlphaScaling::DeltaMethod) {
    slope = log_delta + 2.0 * log_leading_prefactor_derivative(alpha_n, kappa, dim);
    if (!(slope > 0.0)) {
      out.warnings.push_back("delta-method slope is not positive at this delta; using |log delta|");
      slope = log_delta;
    }
  }
  const double se_alpha = std::sqrt(out.alpha_estimate->report.variance_hat);

  const double tau =
      std::sqrt(std::exp(log_leading_prefactor(alpha_n, kappa, dim)) * std::pow(delta, 1.0 - alpha_n / 2.0));
  const auto v = variation(path, spec, tau).per_site;
  for (std::size_t m = 0; m < n; ++m) {
    const double mu = mu_multipower(spec.site_row(m), alpha_n);
    if (!(mu != 0.0)) {
      std::ostringstream os;
      os << "mu of the functional at site " << m << " is zero; its variation does not estimate a volatility";
      fail(ErrorCode::DomainError, os.str());
    }
    const double est = v[m] / mu;
    const auto ref = reference_at(references, m);
    if (!clt_ok || out.alpha_estimate->report.degenerate) {
      EstimateReport r;
      r.estimate = est;
      r.level = level;
      r.degenerate = out.alpha_estimate->report.degenerate;
      out.per_site.push_back(r);
      continue;
    }
    const double se = spec.total_weight(m) / 4.0 * slope * std::abs(est) * se_alpha;
    out.per_site.push_back(make_report(est, se, level, ref));
  }
  return out;
}

}  // namespace hfvol
