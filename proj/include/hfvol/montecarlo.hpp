#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hfvol/estimators.hpp"
#include "hfvol/model.hpp"
#include "hfvol/simulator.hpp"

namespace hfvol {

struct ExactStationary {};
struct FiniteDifference {
  std::optional<FdGridConfig> grid;  // default_fd_grid when absent
  double burn_in = 0.0;              // used only for the default grid
};
using SimulatorChoice = std::variant<ExactStationary, FiniteDifference>;

/// V_f with the exact tau_n; truth mu_f int sigma^w.
struct LlnTarget {
  MultipowerSpec spec;
};
/// V_f / mu_f with the exact tau_n, studentized as in the known-alpha CLT.
struct CltTarget {
  MultipowerSpec spec;
};
struct AlphaCofTarget {
  double p = 2.0;
};
struct AlphaCorrTarget {};
struct VolKnownTarget {
  MultipowerSpec spec;
};
struct VolUnknownTarget {
  MultipowerSpec spec;
  AlphaMethod method = ChangeOfFrequency{2.0};
  UnknownAlphaScaling scaling = UnknownAlphaScaling::DeltaMethod;
};
using Target = std::variant<LlnTarget, CltTarget, AlphaCofTarget, AlphaCorrTarget, VolKnownTarget, VolUnknownTarget>;

std::string target_name(const Target& t);

/// Thresholds checked after a batch; absent fields are not checked.
struct Gate {
  std::optional<double> coverage_min;
  std::optional<double> coverage_max;
  std::optional<double> ks_pvalue_min;
  std::optional<double> max_abs_bias;
  std::optional<double> max_rmse;
  std::optional<double> max_relative_bias;
  double max_error_fraction = 0.01;
};

struct ExperimentConfig {
  ModelParams model;
  SamplingScheme scheme = SamplingScheme::on_line(1.0 / 1024, 1.0, {0.0});
  VolatilityModel volatility = ConstantVol{1.0};
  SimulatorChoice simulator = ExactStationary{};
  Target target = CltTarget{MultipowerSpec::power(2.0, 1)};
  std::size_t replications = 100;
  std::uint64_t master_seed = 1;
  double level = 0.95;
  Gate gate;
};

/// Throws InvalidConfig naming the first inconsistency.
void validate_config(const ExperimentConfig& cfg);

struct ReplicationResult {
  std::size_t replication = 0;
  std::size_t site = 0;
  double estimate = 0.0;
  double truth = 0.0;
  std::optional<double> studentized;
  std::optional<Interval> ci;
  bool hit = false;
};

struct ReplicationError {
  std::size_t replication = 0;
  std::string code;
  std::string message;
};

struct GateCheck {
  std::string name;
  double value = 0.0;
  bool passed = false;
};

struct McSummary {
  std::size_t count = 0;
  double mean = 0.0;
  double mean_truth = 0.0;
  double bias = 0.0;
  double relative_bias = 0.0;
  double rmse = 0.0;
  std::optional<double> coverage;
  std::optional<Interval> coverage_ci;
  std::optional<double> ks_statistic;
  std::optional<double> ks_pvalue;
  double studentized_mean = 0.0;
  double studentized_sd = 0.0;
};

struct McReport {
  std::string target;
  std::size_t replications = 0;
  std::optional<double> truth;  // absent when it varies by replication
  std::vector<ReplicationResult> per_replication;  // ordered by (replication, site)
  std::vector<ReplicationError> errors;
  McSummary summary;
  std::vector<GateCheck> gate;
  bool passed = true;
};

/// Worker count: SPDE_HFVOL_THREADS if set, else hardware concurrency.
std::size_t default_workers();

/// Runs all replications; output is independent of workers.
McReport run_experiment(const ExperimentConfig& cfg, std::size_t workers = 0);

/// Wilson score interval for hits out of n.
Interval coverage_ci(std::size_t hits, std::size_t n, double level = 0.95);

struct KsResult {
  double statistic = 0.0;
  double pvalue = 0.0;
};

/// One-sample Kolmogorov-Smirnov test against N(0, 1) with the asymptotic
/// p-value (Stephens' small-sample correction).
KsResult ks_against_standard_normal(std::vector<double> sample);

/// Kolmogorov survival function P(K > x).
double kolmogorov_survival(double x);

ExperimentConfig parse_experiment_config(const std::string& json_text);
std::string experiment_config_to_json(const ExperimentConfig& cfg);
std::string report_to_json(const McReport& report);

/// replication,estimate,studentized,ci_lo,ci_hi,hit; one row per site.
std::string report_to_csv(const McReport& report);

}  // namespace hfvol
