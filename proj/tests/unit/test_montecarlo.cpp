#include <cmath>

#include "doctest.h"
#include "hfvol/json_io.hpp"
#include "hfvol/montecarlo.hpp"

using namespace hfvol;

namespace {

ExperimentConfig small_config(Target target, std::size_t reps) {
  ExperimentConfig c;
  c.scheme = SamplingScheme::on_line(std::ldexp(1.0, -10), 1.0, {0.0});
  c.target = std::move(target);
  c.replications = reps;
  c.master_seed = 5;
  return c;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::ConstraintViolation;
}

}  // namespace

TEST_CASE("Wilson interval") {
  const auto ci = coverage_ci(950, 1000, 0.95);
  // statsmodels proportion_confint(950, 1000, 0.05, "wilson").
  CHECK(ci.lower == doctest::Approx(0.9346861797557492).epsilon(1e-12));
  CHECK(ci.upper == doctest::Approx(0.9618697376072513).epsilon(1e-12));
  CHECK(coverage_ci(0, 10, 0.95).lower == 0.0);
  CHECK(coverage_ci(10, 10, 0.95).upper == 1.0);
  CHECK(code_of([] { coverage_ci(11, 10, 0.95); }) == ErrorCode::DomainError);
  CHECK(code_of([] { coverage_ci(0, 0, 0.95); }) == ErrorCode::DomainError);
}

TEST_CASE("Kolmogorov survival function") {
  CHECK(kolmogorov_survival(1.3581) == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(kolmogorov_survival(1.6276) == doctest::Approx(0.01).epsilon(1e-3));
  CHECK(kolmogorov_survival(0.5) == doctest::Approx(0.9639).epsilon(1e-3));
  // Both series agree where they switch.
  CHECK(kolmogorov_survival(1.18 - 1e-12) == doctest::Approx(kolmogorov_survival(1.18)).epsilon(1e-9));
  CHECK(kolmogorov_survival(0.0) == 1.0);
}

TEST_CASE("KS test examples") {
  auto s = derive_stream({1, 0});
  StandardNormal z;
  std::vector<double> draws(10000);
  for (auto& v : draws) v = z(s);
  CHECK(ks_against_standard_normal(draws).pvalue > 1e-3);

  CHECK(ks_against_standard_normal(std::vector<double>(50, 0.3)).statistic >= 0.5);

  const std::size_t n = 200;
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) grid[i] = normal_quantile((i + 0.5) / n);
  CHECK(ks_against_standard_normal(grid).statistic <= 0.5 / n + 1e-12);

  std::vector<double> shifted = draws;
  for (auto& v : shifted) v += 0.2;
  CHECK(ks_against_standard_normal(shifted).pvalue < 1e-6);
  CHECK(code_of([] { ks_against_standard_normal(std::vector<double>(5, 0.0)); }) == ErrorCode::DomainError);
}

TEST_CASE("two replications give two entries") {
  const auto r = run_experiment(small_config(CltTarget{MultipowerSpec::power(2.0, 1)}, 2), 1);
  CHECK(r.per_replication.size() == 2);
  const double c = *r.summary.coverage;
  CHECK((c == 0.0 || c == 0.5 || c == 1.0));
  CHECK(r.truth);
  CHECK(*r.truth == doctest::Approx(1.0));
}

TEST_CASE("report JSON is independent of the worker count") {
  const auto cfg = small_config(AlphaCorrTarget{}, 24);
  const std::string a = report_to_json(run_experiment(cfg, 1));
  const std::string b = report_to_json(run_experiment(cfg, 4));
  CHECK(a == b);
  CHECK(report_to_csv(run_experiment(cfg, 3)) == report_to_csv(run_experiment(cfg, 1)));
}

TEST_CASE("per-replication entries are ordered and independent") {
  const auto r = run_experiment(small_config(CltTarget{MultipowerSpec::power(2.0, 1)}, 200), 2);
  REQUIRE(r.per_replication.size() == 200);
  for (std::size_t i = 0; i < 200; ++i) CHECK(r.per_replication[i].replication == i);
  double s = 0.0, ss = 0.0;
  const double m = r.summary.studentized_mean;
  for (std::size_t i = 0; i < 200; ++i) {
    const double a = *r.per_replication[i].studentized - m;
    ss += a * a;
    if (i + 1 < 200) s += a * (*r.per_replication[i + 1].studentized - m);
  }
  CHECK(std::abs(s / ss) < 4.0 / std::sqrt(200.0));
}

TEST_CASE("law of large numbers batch") {
  auto cfg = small_config(LlnTarget{MultipowerSpec::power(2.0, 1)}, 200);
  cfg.scheme = SamplingScheme::on_line(std::ldexp(1.0, -14), 1.0, {0.0});
  cfg.gate.max_abs_bias = 0.005;
  cfg.gate.max_rmse = 0.02;
  const auto r = run_experiment(cfg);
  CHECK(r.passed);
  CHECK(!r.summary.coverage);
  CHECK(!r.summary.ks_pvalue);
}

TEST_CASE("replication errors are recorded, not fatal") {
  auto cfg = small_config(AlphaCorrTarget{}, 4);
  cfg.volatility = ConstantVol{0.0};
  const auto r = run_experiment(cfg, 2);
  CHECK(r.errors.size() == 4);
  CHECK(r.errors[0].code == "DegenerateDenominator");
  CHECK(r.per_replication.empty());
  CHECK_FALSE(r.passed);
}

TEST_CASE("stochastic volatility has per-replication truth") {
  auto cfg = small_config(CltTarget{MultipowerSpec::power(2.0, 1)}, 3);
  cfg.scheme = SamplingScheme::on_line(std::ldexp(1.0, -6), 0.5, {0.0});
  cfg.simulator = FiniteDifference{};
  cfg.volatility = OuFieldVol{1.0, 0.5, 1.0, 0.5};
  const auto r = run_experiment(cfg, 1);
  CHECK_FALSE(r.truth);
  CHECK(r.per_replication[0].truth != r.per_replication[1].truth);
}

TEST_CASE("config validation") {
  auto cfg = small_config(AlphaCorrTarget{}, 1);
  CHECK(code_of([&] { run_experiment(cfg); }) == ErrorCode::InvalidConfig);
  cfg.replications = 2;
  cfg.volatility = SinusoidVol{};
  CHECK(code_of([&] { validate_config(cfg); }) == ErrorCode::InvalidConfig);
  cfg.volatility = ConstantVol{};
  cfg.scheme = SamplingScheme::on_line(std::ldexp(1.0, -6), 0.5, {0.0, 1.0});
  CHECK(code_of([&] { validate_config(cfg); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { parse_experiment_config("{\"scheme\": "); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] {
          parse_experiment_config(R"({"scheme": {"delta_log2": -8}, "target": {"kind": "clt"}, "replications": 0})");
        }) == ErrorCode::InvalidConfig);
}

TEST_CASE("config JSON round trip") {
  const std::string text = R"({
    "model": {"kappa": 1, "lambda": 1, "alpha": 1, "noise": "white"},
    "scheme": {"delta_log2": -10, "horizon": 1, "sites": [0.0]},
    "volatility": {"kind": "ou_field", "theta": 2, "eta": 0.5, "mean": 1, "length": 0.5},
    "simulator": {"kind": "fd", "burn_in": 0},
    "target": {"kind": "vol_unknown", "spec": {"kind": "power", "p": 2}, "alpha_method": {"kind": "corr"}},
    "replications": 10, "master_seed": 3,
    "gate": {"coverage": [0.9, 0.98], "ks_pvalue_min": 0.001}
  })";
  const auto cfg = parse_experiment_config(text);
  CHECK(cfg.scheme.num_increments() == 1024);
  CHECK(std::holds_alternative<VolUnknownTarget>(cfg.target));
  const std::string again = experiment_config_to_json(parse_experiment_config(experiment_config_to_json(cfg)));
  CHECK(again == experiment_config_to_json(cfg));
}
