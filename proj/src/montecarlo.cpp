#include "hfvol/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <numbers>
#include <sstream>
#include <thread>

#include "hfvol/constants.hpp"
#include "hfvol/json_io.hpp"
#include "hfvol/variation.hpp"

namespace hfvol {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

struct Simulated {
  ObservedPath path;
  std::optional<FdSimulation> fd;  // kept when the volatility is random
};

Simulated simulate(const ExperimentConfig& cfg, const SeedSpec& seed) {
  return std::visit(
      Overloaded{
          [&](const ExactStationary&) {
            return Simulated{simulate_exact_stationary(cfg.model, cfg.scheme, cfg.volatility, seed), std::nullopt};
          },
          [&](const FiniteDifference& f) {
            const FdGridConfig grid = f.grid ? *f.grid : default_fd_grid(cfg.model, cfg.scheme, f.burn_in);
            if (is_deterministic(cfg.volatility))
              return Simulated{simulate_fd(cfg.model, cfg.scheme, cfg.volatility, grid, seed), std::nullopt};
            auto sim = simulate_fd_recorded(cfg.model, cfg.scheme, cfg.volatility, grid, seed);
            ObservedPath path = sim.path;
            return Simulated{std::move(path), std::move(sim)};
          },
      },
      cfg.simulator);
}

// int_0^{n delta} |sigma(s, x_m)|^w ds per site: analytic when sigma is
// deterministic, otherwise the Riemann sum of the simulator's record.
std::vector<double> integrated_vol(const ExperimentConfig& cfg, const Simulated& sim, const MultipowerSpec& spec) {
  const std::size_t n_sites = cfg.scheme.num_sites();
  const double horizon = static_cast<double>(cfg.scheme.num_increments()) * cfg.scheme.delta();
  std::vector<double> out(n_sites);
  for (std::size_t m = 0; m < n_sites; ++m) {
    const double w = spec.total_weight(m);
    if (auto v = deterministic_integrated_vol(cfg.volatility, horizon, w)) {
      out[m] = *v;
    } else {
      out[m] = sim.fd->realized_integrated_vol(w)[m];
    }
  }
  return out;
}

double exact_tau(const ExperimentConfig& cfg) { return std::sqrt(tau_sq_exact(cfg.model, cfg.scheme.delta())); }

ReplicationResult from_report(std::size_t rep, std::size_t site, const EstimateReport& r, double truth) {
  ReplicationResult out{rep, site, r.estimate, truth, r.studentized, r.ci, false};
  if (r.ci) out.hit = r.ci->contains(truth);
  return out;
}

std::vector<ReplicationResult> from_vol(std::size_t rep, const VolatilityEstimate& v, const std::vector<double>& truth) {
  std::vector<ReplicationResult> out;
  for (std::size_t m = 0; m < v.per_site.size(); ++m) out.push_back(from_report(rep, m, v.per_site[m], truth[m]));
  return out;
}

std::vector<ReplicationResult> run_replication(const ExperimentConfig& cfg, std::size_t rep) {
  const Simulated sim = simulate(cfg, {cfg.master_seed, rep});
  const ModelParams& p = cfg.model;
  return std::visit(
      Overloaded{
          [&](const LlnTarget& t) {
            const auto v = variation(sim.path, t.spec, exact_tau(cfg)).per_site;
            const auto iv = integrated_vol(cfg, sim, t.spec);
            std::vector<ReplicationResult> out;
            for (std::size_t m = 0; m < v.size(); ++m) {
              const double mu = mu_multipower(t.spec.site_row(m), p.alpha);
              out.push_back(ReplicationResult{rep, m, v[m], mu * iv[m], std::nullopt, std::nullopt, false});
            }
            return out;
          },
          [&](const CltTarget& t) {
            const auto iv = integrated_vol(cfg, sim, t.spec);
            return from_vol(rep, estimate_vol_normalized(sim.path, t.spec, p.alpha, exact_tau(cfg), cfg.level, iv), iv);
          },
          [&](const AlphaCofTarget& t) {
            const auto a = estimate_alpha_cof(sim.path, t.p, cfg.level, p.alpha);
            return std::vector<ReplicationResult>{from_report(rep, 0, a.report, p.alpha)};
          },
          [&](const AlphaCorrTarget&) {
            const auto a = estimate_alpha_corr(sim.path, cfg.level, p.alpha);
            return std::vector<ReplicationResult>{from_report(rep, 0, a.report, p.alpha)};
          },
          [&](const VolKnownTarget& t) {
            const auto iv = integrated_vol(cfg, sim, t.spec);
            return from_vol(rep, estimate_vol_known_alpha(sim.path, t.spec, p.alpha, p.kappa, p.dim, cfg.level, iv), iv);
          },
          [&](const VolUnknownTarget& t) {
            const auto iv = integrated_vol(cfg, sim, t.spec);
            return from_vol(rep,
                            estimate_vol_unknown_alpha(sim.path, t.spec, p.kappa, t.method, p.dim, cfg.level, t.scaling,
                                                       iv),
                            iv);
          },
      },
      cfg.target);
}

McSummary summarize(const std::vector<ReplicationResult>& rows, double level) {
  McSummary s;
  s.count = rows.size();
  if (rows.empty()) return s;
  const double n = static_cast<double>(rows.size());
  double se = 0.0, st = 0.0, sd = 0.0, sq = 0.0;
  std::size_t with_ci = 0, hits = 0;
  std::vector<double> z;
  for (const auto& r : rows) {
    se += r.estimate;
    st += r.truth;
    sd += r.estimate - r.truth;
    sq += (r.estimate - r.truth) * (r.estimate - r.truth);
    if (r.ci) {
      ++with_ci;
      hits += r.hit ? 1 : 0;
    }
    if (r.studentized && std::isfinite(*r.studentized)) z.push_back(*r.studentized);
  }
  s.mean = se / n;
  s.mean_truth = st / n;
  s.bias = sd / n;
  s.relative_bias = s.mean_truth != 0.0 ? s.bias / s.mean_truth : 0.0;
  s.rmse = std::sqrt(sq / n);
  if (with_ci > 0) {
    s.coverage = static_cast<double>(hits) / static_cast<double>(with_ci);
    s.coverage_ci = coverage_ci(hits, with_ci, level);
  }
  if (!z.empty()) {
    double zm = 0.0;
    for (double v : z) zm += v;
    zm /= static_cast<double>(z.size());
    double zv = 0.0;
    for (double v : z) zv += (v - zm) * (v - zm);
    s.studentized_mean = zm;
    s.studentized_sd = z.size() > 1 ? std::sqrt(zv / static_cast<double>(z.size() - 1)) : 0.0;
  }
  if (z.size() >= 10) {
    const auto ks = ks_against_standard_normal(z);
    s.ks_statistic = ks.statistic;
    s.ks_pvalue = ks.pvalue;
  }
  return s;
}

void apply_gate(const Gate& g, McReport& r) {
  auto add = [&](std::string name, double value, bool ok) { r.gate.push_back(GateCheck{std::move(name), value, ok}); };
  const double err_frac = static_cast<double>(r.errors.size()) / static_cast<double>(r.replications);
  add("error_fraction", err_frac, err_frac <= g.max_error_fraction);
  const McSummary& s = r.summary;
  if (g.coverage_min || g.coverage_max) {
    const double c = s.coverage.value_or(NAN);
    const bool ok = s.coverage && (!g.coverage_min || c >= *g.coverage_min) && (!g.coverage_max || c <= *g.coverage_max);
    add("coverage", c, ok);
  }
  if (g.ks_pvalue_min) {
    const double p = s.ks_pvalue.value_or(NAN);
    add("ks_pvalue", p, s.ks_pvalue && p > *g.ks_pvalue_min);
  }
  if (g.max_abs_bias) add("abs_bias", std::abs(s.bias), std::abs(s.bias) < *g.max_abs_bias);
  if (g.max_rmse) add("rmse", s.rmse, s.rmse < *g.max_rmse);
  if (g.max_relative_bias)
    add("relative_bias", std::abs(s.relative_bias), std::abs(s.relative_bias) < *g.max_relative_bias);
  r.passed = std::all_of(r.gate.begin(), r.gate.end(), [](const GateCheck& c) { return c.passed; });
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string target_name(const Target& t) {
  return std::visit(Overloaded{[](const LlnTarget&) { return std::string("lln"); },
                               [](const CltTarget&) { return std::string("clt"); },
                               [](const AlphaCofTarget&) { return std::string("alpha_cof"); },
                               [](const AlphaCorrTarget&) { return std::string("alpha_corr"); },
                               [](const VolKnownTarget&) { return std::string("vol_known"); },
                               [](const VolUnknownTarget&) { return std::string("vol_unknown"); }},
                    t);
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.replications < 2) fail(ErrorCode::InvalidConfig, "replications must be at least 2");
  if (!(cfg.level > 0.0 && cfg.level < 1.0)) fail(ErrorCode::InvalidConfig, "level must lie in (0, 1)");
  validate_volatility(cfg.volatility);
  std::visit(Overloaded{
                 [&](const ExactStationary&) {
                   validate_params(cfg.model);
                   if (!std::holds_alternative<ConstantVol>(cfg.volatility))
                     fail(ErrorCode::InvalidConfig, "the exact simulator requires constant volatility");
                   if (cfg.scheme.num_sites() != 1) fail(ErrorCode::InvalidConfig, "the exact simulator takes one site");
                 },
                 [&](const FiniteDifference& f) {
                   validate_params_allow_zero_lambda(cfg.model);
                   validate_fd_grid(cfg.model, cfg.scheme,
                                    f.grid ? *f.grid : default_fd_grid(cfg.model, cfg.scheme, f.burn_in));
                 },
             },
             cfg.simulator);
  std::visit(Overloaded{
                 [&](const AlphaCofTarget& t) {
                   if (!(t.p > 0.0)) fail(ErrorCode::InvalidConfig, "target.p must be positive");
                 },
                 [](const AlphaCorrTarget&) {},
                 [&](const auto& t) {
                   if (t.spec.num_sites() != cfg.scheme.num_sites())
                     fail(ErrorCode::InvalidConfig, "target spec rows must match the number of sites");
                 },
             },
             cfg.target);
}

std::size_t default_workers() {
  if (const char* env = std::getenv("SPDE_HFVOL_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

McReport run_experiment(const ExperimentConfig& cfg, std::size_t workers) {
  validate_config(cfg);
  if (workers == 0) workers = default_workers();
  workers = std::min(workers, cfg.replications);

  struct Slot {
    std::vector<ReplicationResult> rows;
    std::optional<ReplicationError> error;
  };
  std::vector<Slot> slots(cfg.replications);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < cfg.replications; i = next++) {
      try {
        slots[i].rows = run_replication(cfg, i);
      } catch (const Error& e) {
        slots[i].error = ReplicationError{i, std::string(to_string(e.code())), e.what()};
      } catch (const std::exception& e) {
        slots[i].error = ReplicationError{i, "Internal", e.what()};
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  McReport report;
  report.target = target_name(cfg.target);
  report.replications = cfg.replications;
  for (auto& s : slots) {
    if (s.error) report.errors.push_back(*s.error);
    for (auto& r : s.rows) report.per_replication.push_back(r);
  }
  if (!report.per_replication.empty()) {
    const double t0 = report.per_replication.front().truth;
    const bool fixed = std::all_of(report.per_replication.begin(), report.per_replication.end(),
                                   [&](const ReplicationResult& r) { return r.truth == t0; });
    if (fixed) report.truth = t0;
  }
  report.summary = summarize(report.per_replication, cfg.level);
  apply_gate(cfg.gate, report);
  return report;
}

Interval coverage_ci(std::size_t hits, std::size_t n, double level) {
  if (n == 0 || hits > n) fail(ErrorCode::DomainError, "coverage_ci needs 0 <= hits <= n and n >= 1");
  if (!(level > 0.0 && level < 1.0)) fail(ErrorCode::DomainError, "level must lie in (0, 1)");
  const double z = normal_two_sided_quantile(level);
  const double nn = static_cast<double>(n);
  const double ph = static_cast<double>(hits) / nn;
  const double denom = 1.0 + z * z / nn;
  const double centre = (ph + z * z / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(ph * (1.0 - ph) / nn + z * z / (4.0 * nn * nn)) / denom;
  return Interval{hits == 0 ? 0.0 : std::max(0.0, centre - half), hits == n ? 1.0 : std::min(1.0, centre + half)};
}

double kolmogorov_survival(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 1.18) {
    // Jacobi-theta form, fast for small x.
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double s = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double j = 2.0 * k - 1.0;
      s += std::exp(-j * j * pi2 / (8.0 * x * x));
    }
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / x * s, 0.0, 1.0);
  }
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    s += (k % 2 == 1 ? term : -term);
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

KsResult ks_against_standard_normal(std::vector<double> sample) {
  if (sample.size() < 10) fail(ErrorCode::DomainError, "KS test needs at least 10 values");
  for (double v : sample)
    if (!std::isfinite(v)) fail(ErrorCode::DomainError, "KS sample contains a non-finite value");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = normal_cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  const double sn = std::sqrt(n);
  return KsResult{d, kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d)};
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::InvalidConfig, std::string("malformed JSON: ") + e.what());
  }
  return config_from_json(j);
}

std::string experiment_config_to_json(const ExperimentConfig& cfg) { return to_json(cfg).dump(2); }

std::string report_to_json(const McReport& report) { return to_json(report).dump(2) + "\n"; }

std::string report_to_csv(const McReport& report) {
  std::string out = "replication,estimate,studentized,ci_lo,ci_hi,hit\n";
  for (const auto& r : report.per_replication) {
    out += std::to_string(r.replication) + ',' + fmt17(r.estimate) + ',';
    out += (r.studentized ? fmt17(*r.studentized) : std::string()) + ',';
    out += (r.ci ? fmt17(r.ci->lower) : std::string()) + ',';
    out += (r.ci ? fmt17(r.ci->upper) : std::string()) + ',';
    out += r.hit ? "1\n" : "0\n";
  }
  return out;
}

}  // namespace hfvol
