#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "hfvol/constants.hpp"
#include "hfvol/special_functions.hpp"
#include "hfvol/estimators.hpp"
#include "hfvol/ingest.hpp"
#include "hfvol/json_io.hpp"
#include "hfvol/montecarlo.hpp"
#include "hfvol/simulator.hpp"

using namespace hfvol;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 2;
constexpr int kSimulationFailure = 3;
constexpr int kEstimatorError = 4;
constexpr int kGateFailure = 5;

int report_error(const std::exception& e, int code) {
  std::cerr << "error: " << e.what() << '\n';
  return code;
}

std::string read_file(const std::string& name) {
  std::ifstream in(name, std::ios::binary);
  if (!in) fail(ErrorCode::InvalidConfig, "cannot open " + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json parse_json_file(const std::string& name) {
  const std::string text = read_file(name);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::InvalidConfig, name + ": malformed JSON: " + e.what());
  }
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) fail(ErrorCode::InvalidConfig, "cannot write " + out);
  f << text;
}

// ---- constants -------------------------------------------------------------

struct ConstantsArgs {
  double alpha = 1.0;
  double p = 2.0;
  std::optional<double> lambda;
  std::optional<double> delta;
  double kappa = 1.0;
  int dim = 1;
  std::size_t max_lag = 10;
  std::string out;
};

int cmd_constants(const ConstantsArgs& a) {
  Json j;
  try {
    if (!(a.alpha > 0.0 && a.alpha < 2.0)) fail(ErrorCode::ConstraintViolation, "alpha must lie in (0, 2)");
    if (!(a.p > 0.0)) fail(ErrorCode::ConstraintViolation, "p must be positive");
    if (a.lambda.has_value() != a.delta.has_value())
      fail(ErrorCode::ConstraintViolation, "--lambda and --delta must be given together");
    j["alpha"] = a.alpha;
    j["p"] = a.p;
    j["mu_p"] = gaussian_abs_moment(a.p);
    j["Gamma"] = gamma_weights(a.alpha, a.max_lag);
    if (a.delta) {
      if (!(*a.delta > 0.0) || !(*a.lambda > 0.0))
        fail(ErrorCode::ConstraintViolation, "--lambda and --delta must be positive");
      std::vector<double> gn;
      for (std::size_t r = 0; r <= a.max_lag; ++r) gn.push_back(gamma_weight_n(a.alpha, *a.lambda, *a.delta, r));
      j["Gamma_n"] = gn;
      if (a.dim >= a.alpha) {
        const ModelParams mp{a.kappa, *a.lambda, a.alpha, a.dim,
                             a.alpha == 1.0 && a.dim == 1 ? NoiseKind::WhiteNoise : NoiseKind::RieszKernel};
        j["tau_sq"] = tau_sq_exact(validate_params(mp), *a.delta);
      }
    }
    j["R_p"] = big_R(a.p, a.alpha);
    j["C_0"] = c0_constants(a.p, a.alpha).c0;
    j["C_tilde_0"] = *c0_tilde_constants(a.alpha).tilde_c0;
  } catch (const Error& e) {
    return report_error(e, kInvalid);
  }
  emit(j.dump(2) + "\n", a.out);
  return kOk;
}

// ---- simulate --------------------------------------------------------------

struct SimulateArgs {
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_simulate(const SimulateArgs& a) {
  ModelParams model;
  SamplingScheme scheme = SamplingScheme::on_line(1.0, 2.0, {0.0});
  VolatilityModel vol;
  SimulatorChoice sim;
  try {
    const Json j = parse_json_file(a.config);
    if (!j.is_object()) fail(ErrorCode::InvalidConfig, "config must be a JSON object");
    model = model_from_json(j.contains("model") ? j.at("model") : Json::object());
    if (!j.contains("scheme")) fail(ErrorCode::InvalidConfig, "config.scheme is required");
    scheme = scheme_from_json(j.at("scheme"));
    vol = j.contains("volatility") ? volatility_from_json(j.at("volatility")) : VolatilityModel{ConstantVol{}};
    sim = j.contains("simulator") ? simulator_from_json(j.at("simulator"), model, scheme) : SimulatorChoice{};
    if (const auto* fd = std::get_if<FiniteDifference>(&sim)) {
      validate_params_allow_zero_lambda(model);
      validate_fd_grid(model, scheme, *fd->grid);
    } else {
      validate_params(model);
    }
  } catch (const Error& e) {
    return report_error(e, kInvalid);
  }
  try {
    const SeedSpec seed{a.seed, 0};
    const ObservedPath path =
        std::holds_alternative<ExactStationary>(sim)
            ? simulate_exact_stationary(model, scheme, vol, seed)
            : simulate_fd(model, scheme, vol, *std::get<FiniteDifference>(sim).grid, seed);
    emit(format_path_csv(path), a.out);
  } catch (const Error& e) {
    const bool bad_input = e.code() == ErrorCode::UnsupportedSpec || e.code() == ErrorCode::ConstraintViolation ||
                           e.code() == ErrorCode::InvalidConfig;
    return report_error(e, bad_input ? kInvalid : kSimulationFailure);
  }
  return kOk;
}

// ---- estimate --------------------------------------------------------------

struct EstimateArgs {
  std::string path;
  std::string method;
  double p = 2.0;
  std::vector<double> weights;
  std::optional<double> alpha;
  double kappa = 1.0;
  int dim = 1;
  double level = 0.95;
  std::string alpha_method = "cof";
  double p0 = 2.0;
  std::string scaling = "delta";
  double rtol = 1e-9;
  std::string out;
};

int cmd_estimate(const EstimateArgs& a) {
  std::optional<ObservedPath> path;
  try {
    path = read_path_csv(a.path, a.rtol).first;
  } catch (const Error& e) {
    return report_error(e, kInvalid);
  }
  const std::size_t sites = path->scheme().num_sites();
  const MultipowerSpec spec =
      a.weights.empty() ? MultipowerSpec::power(a.p, sites) : MultipowerSpec::multipower(a.weights, sites);
  Json j;
  try {
    if (a.method == "cof" || a.method == "corr") {
      const AlphaMethod m = a.method == "cof" ? AlphaMethod{ChangeOfFrequency{a.p}} : AlphaMethod{CorrelationRatio{}};
      try {
        j = to_json(estimate_alpha(*path, m, a.level, a.alpha));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateDenominator) throw;
        j = Json{{"method", method_name(m)}, {"estimate", nullptr}, {"degenerate", true}, {"warnings", {e.what()}}};
      }
      for (const auto& w : j["warnings"]) std::cerr << "warning: " << w.get<std::string>() << '\n';
    } else if (a.method == "vol-known") {
      if (!a.alpha) fail(ErrorCode::InvalidConfig, "--alpha is required for vol-known");
      j = Json{{"method", "vol_known"}};
      j.update(to_json(estimate_vol_known_alpha(*path, spec, *a.alpha, a.kappa, a.dim, a.level)));
    } else {
      if (a.alpha_method != "cof" && a.alpha_method != "corr")
        fail(ErrorCode::InvalidConfig, "--alpha-method must be cof or corr");
      const AlphaMethod m =
          a.alpha_method == "cof" ? AlphaMethod{ChangeOfFrequency{a.p0}} : AlphaMethod{CorrelationRatio{}};
      const auto scaling = a.scaling == "printed" ? UnknownAlphaScaling::Printed : UnknownAlphaScaling::DeltaMethod;
      j = Json{{"method", "vol_unknown"}};
      try {
        j.update(to_json(estimate_vol_unknown_alpha(*path, spec, a.kappa, m, a.dim, a.level, scaling)));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateDenominator) throw;
        j.update(Json{{"estimate", nullptr}, {"degenerate", true}, {"warnings", {e.what()}}});
      }
    }
  } catch (const Error& e) {
    return report_error(e, e.code() == ErrorCode::InvalidConfig ? kInvalid : kEstimatorError);
  }
  emit(j.dump(2) + "\n", a.out);
  return kOk;
}

// ---- mc --------------------------------------------------------------------

struct McArgs {
  std::string config;
  std::string out;
  std::string csv;
  std::size_t workers = 0;
};

int cmd_mc(const McArgs& a) {
  ExperimentConfig cfg;
  try {
    cfg = config_from_json(parse_json_file(a.config));
  } catch (const Error& e) {
    return report_error(e, kInvalid);
  }
  const auto t0 = std::chrono::steady_clock::now();
  McReport report;
  try {
    report = run_experiment(cfg, a.workers);
  } catch (const Error& e) {
    return report_error(e, kSimulationFailure);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  try {
    emit(report_to_json(report), a.out);
    if (!a.csv.empty()) emit(report_to_csv(report), a.csv);
  } catch (const Error& e) {
    return report_error(e, kInvalid);
  }
  std::cerr << report.target << ": " << report.per_replication.size() << " results, " << report.errors.size()
            << " errors, " << secs << " s\n";
  for (const auto& g : report.gate)
    std::cerr << "  " << (g.passed ? "pass" : "FAIL") << ' ' << g.name << " = " << g.value << '\n';
  return report.passed ? kOk : kGateFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"High-frequency volatility and noise-index estimation for the stochastic heat equation"};
  app.require_subcommand(1);

  ConstantsArgs ca;
  auto* constants = app.add_subcommand("constants", "Print the limit constants for alpha and p");
  constants->add_option("--alpha", ca.alpha, "Noise correlation index in (0, 2)")->required();
  constants->add_option("--p", ca.p, "Power p")->default_val(2.0);
  constants->add_option("--lambda", ca.lambda, "Damping rate, for the finite-delta weights");
  constants->add_option("--delta", ca.delta, "Time step, for the finite-delta weights");
  constants->add_option("--kappa", ca.kappa, "Diffusivity, for tau_n^2")->default_val(1.0);
  constants->add_option("--dim", ca.dim, "Spatial dimension, for tau_n^2")->default_val(1);
  constants->add_option("--max-lag", ca.max_lag, "Largest lag r printed")->default_val(10);
  constants->add_option("--out", ca.out, "Output file (default stdout)");

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "Simulate a path and write it as CSV");
  simulate->add_option("--config", sa.config, "Simulation config JSON")->required();
  simulate->add_option("--seed", sa.seed, "Master seed")->default_val(0);
  simulate->add_option("--out", sa.out, "Output CSV (default stdout)");

  EstimateArgs ea;
  auto* estimate = app.add_subcommand("estimate", "Estimate alpha or integrated volatility from a path CSV");
  estimate->add_option("--path", ea.path, "Path CSV")->required();
  estimate->add_option("--method", ea.method, "cof | corr | vol-known | vol-unknown")
      ->required()
      ->check(CLI::IsMember({"cof", "corr", "vol-known", "vol-unknown"}));
  estimate->add_option("--p", ea.p, "Power for cof, or for the volatility functional")->default_val(2.0);
  estimate->add_option("--weights", ea.weights, "Multipower weights for the volatility functional")->delimiter(',');
  estimate->add_option("--alpha", ea.alpha, "Known alpha (vol-known) or reference alpha (cof, corr)");
  estimate->add_option("--kappa", ea.kappa, "Diffusivity")->default_val(1.0);
  estimate->add_option("--dim", ea.dim, "Spatial dimension")->default_val(1);
  estimate->add_option("--level", ea.level, "Confidence level")->default_val(0.95);
  estimate->add_option("--alpha-method", ea.alpha_method, "cof | corr, for vol-unknown")->default_val("cof");
  estimate->add_option("--p0", ea.p0, "Power of the cof alpha estimator, for vol-unknown")->default_val(2.0);
  estimate->add_option("--scaling", ea.scaling, "delta | printed, for vol-unknown")
      ->default_val("delta")
      ->check(CLI::IsMember({"delta", "printed"}));
  estimate->add_option("--rtol", ea.rtol, "Relative tolerance on time gaps")->default_val(1e-9);
  estimate->add_option("--out", ea.out, "Output JSON (default stdout)");

  McArgs ma;
  auto* mc = app.add_subcommand("mc", "Run a Monte Carlo experiment");
  mc->add_option("--config", ma.config, "Experiment config JSON")->required();
  mc->add_option("--out", ma.out, "Report JSON (default stdout)");
  mc->add_option("--csv", ma.csv, "Per-replication CSV");
  mc->add_option("--workers", ma.workers, "Worker threads (default SPDE_HFVOL_THREADS or all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalid;
  }

  try {
    if (*constants) return cmd_constants(ca);
    if (*simulate) return cmd_simulate(sa);
    if (*estimate) return cmd_estimate(ea);
    return cmd_mc(ma);
  } catch (const Error& e) {
    return report_error(e, kInvalid);
  }
}
