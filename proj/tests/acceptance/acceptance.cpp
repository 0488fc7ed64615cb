// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "hfvol/constants.hpp"
#include "hfvol/estimators.hpp"
#include "hfvol/montecarlo.hpp"
#include "hfvol/simulator.hpp"
#include "hfvol/variation.hpp"

using namespace hfvol;

namespace {

// Pinned tolerances.
constexpr double kR2 = 2.357487, kR2Tol = 1e-5;
constexpr double kR4 = 109.223069, kR4Tol = 1e-4;
constexpr double kTelescopeTol = 1e-12;
constexpr double kC0IdentityTol = 1e-8;
constexpr double kVarianceSe = 3.0, kAcfSe = 4.0;
constexpr double kAgreementSe = 3.0;
constexpr double kVolUnknownMaxError = 0.05;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Line {
  int id;
  bool passed;
  std::string detail;
};

std::vector<Line> lines;
std::filesystem::path config_dir = HFVOL_ACCEPTANCE_DIR;
std::filesystem::path report_dir = "acceptance_reports";
std::map<std::string, std::string> report_json;  // name -> JSON from the first run
std::map<std::string, ExperimentConfig> configs;

void record(int id, bool passed, const std::string& detail) {
  lines.push_back({id, passed, detail});
  std::printf("criterion %d: %s  %s\n", id, passed ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

ExperimentConfig load(const std::string& name) {
  std::ifstream in(config_dir / (name + ".json"));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str());
}

McReport run_named(const std::string& name, const ExperimentConfig& cfg) {
  const McReport r = run_experiment(cfg, 1);
  report_json[name] = report_to_json(r);
  configs[name] = cfg;
  std::ofstream(report_dir / (name + ".json")) << report_json[name];
  return r;
}

McReport run_named(const std::string& name) { return run_named(name, load(name)); }

std::string gate_text(const McReport& r) {
  std::string s;
  for (const auto& g : r.gate) s += fmt(" %s=%.4g(%s)", g.name.c_str(), g.value, g.passed ? "ok" : "bad");
  return s;
}

void criterion1() {
  const auto t0 = Clock::now();
  const double r2 = big_R(2.0, 1.0), r4 = big_R(4.0, 1.0);
  const double secs = seconds_since(t0);
  const bool ok = std::abs(r2 - kR2) < kR2Tol && std::abs(r4 - kR4) < kR4Tol && secs < 1.0;
  record(1, ok, fmt("R_2=%.7f R_4=%.6f runtime=%.3fs", r2, r4, secs));
}

void criterion2() {
  const auto t0 = Clock::now();
  double worst_tel = 0.0;
  for (double alpha : {0.25, 0.5, 1.0, 1.5, 1.9}) {
    const double e = 1.0 - alpha / 2.0;
    const std::size_t big_r = 10000;
    const auto g = gamma_weights(alpha, big_r);
    double s = 0.0;
    for (std::size_t r = 1; r <= big_r; ++r) s += g[r];
    const double closed = std::pow(big_r + 1.0, e) - std::pow(static_cast<double>(big_r), e);
    worst_tel = std::max(worst_tel, std::abs(1.0 + 2.0 * s - closed));
  }
  double worst_c0 = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double alpha = 0.05 + 0.1 * i;
    const auto c = c0_constants(2.0, alpha);
    const double g1 = gamma_weight(alpha, 1);
    worst_c0 = std::max(worst_c0, std::abs(c.c0 - *c.tilde_c0 / ((1 + g1) * (1 + g1))) / std::max(1.0, std::abs(c.c0)));
  }
  const double secs = seconds_since(t0);
  const bool ok = worst_tel <= kTelescopeTol && worst_c0 <= kC0IdentityTol && secs < 5.0;
  record(2, ok, fmt("max telescoping error=%.2e max C0 identity error=%.2e runtime=%.2fs", worst_tel, worst_c0, secs));
}

void criterion3() {
  const auto t0 = Clock::now();
  const double delta = std::ldexp(1.0, -14);
  const std::size_t reps = 200, max_lag = 10;
  bool ok = true;
  std::string detail;
  for (double alpha : {0.5, 1.0, 1.5}) {
    const ModelParams p = alpha == 1.0 ? ModelParams{} : ModelParams{1.0, 1.0, alpha, 2, NoiseKind::RieszKernel};
    const auto scheme = SamplingScheme::on_line(delta, 1.0, {0.0});
    std::vector<double> var(reps);
    std::vector<std::vector<double>> acf(max_lag + 1, std::vector<double>(reps));
    for (std::size_t k = 0; k < reps; ++k) {
      const auto path = simulate_exact_stationary(p, scheme, ConstantVol{1.0}, {31, k});
      const auto inc = increments(path).column(0);
      const double n = static_cast<double>(inc.size());
      double s2 = 0.0;
      for (double v : inc) s2 += v * v;
      var[k] = s2 / n;
      for (std::size_t r = 1; r <= max_lag; ++r) {
        double s = 0.0;
        for (std::size_t i = 0; i + r < inc.size(); ++i) s += inc[i] * inc[i + r];
        acf[r][k] = s / (n - static_cast<double>(r)) / var[k];
      }
    }
    auto mean_se = [&](const std::vector<double>& v) {
      double m = 0.0;
      for (double x : v) m += x;
      m /= static_cast<double>(v.size());
      double ss = 0.0;
      for (double x : v) ss += (x - m) * (x - m);
      return std::pair{m, std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()))};
    };
    const double tau2 = tau_sq_exact(p, delta);
    const auto [mv, sv] = mean_se(var);
    const double zv = std::abs(mv - tau2) / sv;
    double worst_acf = 0.0;
    for (std::size_t r = 1; r <= max_lag; ++r) {
      const auto [ma, sa] = mean_se(acf[r]);
      worst_acf = std::max(worst_acf, std::abs(ma - gamma_weight_n(alpha, p.lambda, delta, r)) / sa);
    }
    ok = ok && zv < kVarianceSe && worst_acf < kAcfSe;
    detail += fmt("alpha=%.1f: var z=%.2f max acf z=%.2f; ", alpha, zv, worst_acf);
  }
  const double secs = seconds_since(t0);
  ok = ok && secs < 60.0;
  record(3, ok, detail + fmt("runtime=%.1fs", secs));
}

void criterion4() {
  const auto t0 = Clock::now();
  const auto r = run_named("lln_white_p2");
  const double secs = seconds_since(t0);
  record(4, r.passed && secs < 60.0,
         fmt("mean=%.5f rmse=%.5f runtime=%.1fs%s", r.summary.mean, r.summary.rmse, secs, gate_text(r).c_str()));
}

void criterion5() {
  const auto t0 = Clock::now();
  const auto r = run_named("clt_white_p2");
  const double secs = seconds_since(t0);
  record(5, r.passed && secs < 300.0,
         fmt("ks p=%.4g coverage=%.3f runtime=%.1fs%s", r.summary.ks_pvalue.value_or(NAN),
             r.summary.coverage.value_or(NAN), secs, gate_text(r).c_str()));
}

void criterion6() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  for (const auto& [tag, alpha] : std::vector<std::pair<std::string, double>>{{"a050", 0.5}, {"a100", 1.0}, {"a150", 1.5}}) {
    const auto cof = run_named("alpha_cof_" + tag);
    const auto corr = run_named("alpha_corr_" + tag);
    const double delta = configs["alpha_cof_" + tag].scheme.delta();
    const double se = std::sqrt(delta * c0_constants(2.0, alpha).c0);
    double worst = 0.0;
    const std::size_t n = std::min(cof.per_replication.size(), corr.per_replication.size());
    bool paired = cof.per_replication.size() == corr.per_replication.size();
    for (std::size_t i = 0; i < n; ++i) {
      paired = paired && cof.per_replication[i].replication == corr.per_replication[i].replication;
      worst = std::max(worst, std::abs(cof.per_replication[i].estimate - corr.per_replication[i].estimate) / se);
    }
    ok = ok && cof.passed && corr.passed && paired && worst < kAgreementSe;
    detail += fmt("alpha=%.1f: cof mean=%.4f cov=%.3f, corr mean=%.4f cov=%.3f, max |diff|/se=%.2f; ", alpha,
                  cof.summary.mean, cof.summary.coverage.value_or(NAN), corr.summary.mean,
                  corr.summary.coverage.value_or(NAN), worst);
  }
  const double secs = seconds_since(t0);
  ok = ok && secs < 300.0;
  record(6, ok, detail + fmt("runtime=%.1fs", secs));
}

void criterion7() {
  const auto t0 = Clock::now();
  const auto r = run_named("sv_clt_ou");
  const double secs = seconds_since(t0);
  record(7, r.passed && secs < 900.0,
         fmt("ks p=%.4g relative bias=%.4f studentized mean=%.3f sd=%.3f coverage=%.3f runtime=%.1fs%s",
             r.summary.ks_pvalue.value_or(NAN), r.summary.relative_bias, r.summary.studentized_mean,
             r.summary.studentized_sd, r.summary.coverage.value_or(NAN), secs, gate_text(r).c_str()));
}

void criterion8() {
  const auto t0 = Clock::now();
  const auto r = run_named("vol_unknown_a100");
  auto printed_cfg = configs["vol_unknown_a100"];
  std::get<VolUnknownTarget>(printed_cfg.target).scaling = UnknownAlphaScaling::Printed;
  printed_cfg.gate = Gate{};
  const auto printed = run_named("vol_unknown_a100_printed", printed_cfg);

  const ModelParams p;
  const auto spec = MultipowerSpec::power(2.0, 1);
  const std::size_t reps = 100;
  std::vector<double> ratios;
  for (int k = 8; k <= 14; ++k) {
    const auto scheme = SamplingScheme::on_line(std::ldexp(1.0, -k), 1.0, {0.0});
    double s = 0.0;
    for (std::size_t i = 0; i < reps; ++i) {
      const auto path = simulate_exact_stationary(p, scheme, ConstantVol{1.0}, {41, i});
      const auto known = estimate_vol_known_alpha(path, spec, 1.0, 1.0);
      const auto unknown = estimate_vol_unknown_alpha(path, spec, 1.0, AlphaMethod{ChangeOfFrequency{2.0}});
      const auto& kc = *known.per_site[0].ci;
      const auto& uc = *unknown.per_site[0].ci;
      s += (uc.upper - uc.lower) / (kc.upper - kc.lower);
    }
    ratios.push_back(s / static_cast<double>(reps));
  }
  bool monotone = true;
  std::string ratio_text;
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    if (i > 0) monotone = monotone && ratios[i] > ratios[i - 1];
    ratio_text += fmt("%s%.2f", i ? "," : "", ratios[i]);
  }
  const double err = std::abs(r.summary.bias);
  const double secs = seconds_since(t0);
  const bool ok = r.passed && err < kVolUnknownMaxError && monotone && secs < 300.0;
  record(8, ok,
         fmt("mean error=%.4f coverage=%.3f (printed scaling: %.3f) width ratios k=8..14 [%s] runtime=%.1fs%s", err,
             r.summary.coverage.value_or(NAN), printed.summary.coverage.value_or(NAN), ratio_text.c_str(), secs,
             gate_text(r).c_str()));
}

void criterion9() {
  const auto t0 = Clock::now();
  std::vector<std::string> mismatched;
  for (const auto& [name, json] : report_json) {
    const std::string again = report_to_json(run_experiment(configs[name], 3));
    if (again != json) mismatched.push_back(name);
  }
  const double secs = seconds_since(t0);
  std::string detail = fmt("%zu reports rerun with 3 workers vs 1", report_json.size());
  for (const auto& m : mismatched) detail += " mismatch:" + m;
  record(9, mismatched.empty(), detail + fmt(" runtime=%.1fs", secs));
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) report_dir = argv[1];
  std::filesystem::create_directories(report_dir);
  const std::vector<std::function<void()>> steps{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                 criterion6, criterion7, criterion8, criterion9};
  for (std::size_t i = 0; i < steps.size(); ++i) {
    try {
      steps[i]();
    } catch (const std::exception& e) {
      record(static_cast<int>(i + 1), false, std::string("exception: ") + e.what());
    }
  }
  int failed = 0;
  for (const auto& l : lines) failed += l.passed ? 0 : 1;
  std::printf("%d of %zu criteria passed\n", static_cast<int>(lines.size()) - failed, lines.size());
  return failed == 0 ? 0 : 1;
}
