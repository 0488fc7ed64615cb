#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hfvol/model.hpp"

namespace hfvol {

/// Change-of-frequency estimator with power p.
struct ChangeOfFrequency {
  double p = 2.0;
};

/// Correlation-ratio estimator.
struct CorrelationRatio {};

using AlphaMethod = std::variant<ChangeOfFrequency, CorrelationRatio>;

std::string method_name(const AlphaMethod& method);

struct AlphaEstimate {
  EstimateReport report;  // pooled; estimate is the unclipped mean of per_site
  AlphaMethod method;
  std::vector<double> per_site;
  double clipped = 0.0;  // estimate clipped to [0.01, 1.99], fed to the constants
};

/// Range the alpha estimate is clipped to before entering C_0 or tau-hat.
inline constexpr double kAlphaClipLow = 0.01;
inline constexpr double kAlphaClipHigh = 1.99;

/// alpha-hat^(p) = 2 - (4/p) log2 ratio, averaged over sites, with its
/// studentized normal CI. reference (the true alpha, if known) fills
/// report.studentized.
AlphaEstimate estimate_alpha_cof(const ObservedPath& path, double p, double level = 0.95,
                                 std::optional<double> reference = std::nullopt);

/// alpha-tilde = mean of -2 log2(1 + V_Psi(1,1) / V_Phi(2)) over sites.
AlphaEstimate estimate_alpha_corr(const ObservedPath& path, double level = 0.95,
                                  std::optional<double> reference = std::nullopt);

AlphaEstimate estimate_alpha(const ObservedPath& path, const AlphaMethod& method, double level = 0.95,
                             std::optional<double> reference = std::nullopt);

enum class RateTag { Root, RootLog };

/// How the unknown-alpha standard error scales the alpha fluctuation.
///
/// Printed: (w/4) |log delta| V-hat se(alpha), the leading term.
/// DeltaMethod: (w/4) |d log tau-hat^2 / d alpha| V-hat se(alpha)
///   = (w/4) (|log delta| + 2 (log g)'(alpha_n)) V-hat se(alpha), which keeps
///   the O(1) part of the derivative the leading term drops.
enum class UnknownAlphaScaling { DeltaMethod, Printed };

struct KnownAlpha {
  double alpha = 1.0;
};

using AlphaMode = std::variant<KnownAlpha, AlphaMethod>;

struct VolatilityEstimate {
  std::vector<EstimateReport> per_site;  // targets int_0^T |sigma(s, x_m)|^{w_m} ds
  std::optional<AlphaEstimate> alpha_estimate;
  double alpha_used = 0.0;
  RateTag rate = RateTag::Root;
  std::vector<std::string> warnings;
};

/// V_f(tau) / mu_f per site with the known-alpha studentized CI, for a
/// caller-supplied normalizer tau (e.g. the exact tau_n).
VolatilityEstimate estimate_vol_normalized(const ObservedPath& path, const MultipowerSpec& spec, double alpha,
                                           double tau, double level = 0.95,
                                           const std::vector<double>& references = {});

/// Known alpha and kappa; tau-tilde from the leading term; lambda is never read. references (true integrated
/// volatilities, if known) fill the studentized statistics.
VolatilityEstimate estimate_vol_known_alpha(const ObservedPath& path, const MultipowerSpec& spec, double alpha,
                                            double kappa, int dim = 1, double level = 0.95,
                                            const std::vector<double>& references = {});

/// alpha estimated from the same path by method, then plugged into tau-hat.
/// A KnownAlpha mode delegates to estimate_vol_known_alpha.
VolatilityEstimate estimate_vol_unknown_alpha(const ObservedPath& path, const MultipowerSpec& spec, double kappa,
                                              const AlphaMode& mode, int dim = 1, double level = 0.95,
                                              UnknownAlphaScaling scaling = UnknownAlphaScaling::DeltaMethod,
                                              const std::vector<double>& references = {});

/// True when the weights meet the CLT hypotheses: every Phi weight in
/// {0, 2} or >= 4; every Psi row total even.
bool satisfies_clt_weights(const MultipowerSpec& spec);

}  // namespace hfvol
