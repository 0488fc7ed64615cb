#include "hfvol/json_io.hpp"

#include <cmath>
#include <sstream>

namespace hfvol {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

[[noreturn]] void bad(const std::string& what) { fail(ErrorCode::InvalidConfig, what); }

void require_object(const Json& j, const std::string& where) {
  if (!j.is_object()) bad(where + " must be a JSON object");
}

template <class T>
T read(const Json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) bad(where + "." + key + " is required");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    bad(where + "." + key + " has the wrong type");
  }
}

template <class T>
T read_or(const Json& j, const std::string& key, T fallback, const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return read<T>(j, key, where);
}

std::string kind_of(const Json& j, const std::string& where) {
  require_object(j, where);
  return read<std::string>(j, "kind", where);
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json interval_json(const std::optional<Interval>& ci) {
  if (!ci) return nullptr;
  return Json::array({ci->lower, ci->upper});
}

std::string noise_name(NoiseKind k) { return k == NoiseKind::WhiteNoise ? "white" : "riesz"; }

std::string scaling_name(UnknownAlphaScaling s) {
  return s == UnknownAlphaScaling::DeltaMethod ? "delta_method" : "printed";
}

Json method_json(const AlphaMethod& m) {
  return std::visit(Overloaded{[](const ChangeOfFrequency& c) { return Json{{"kind", "cof"}, {"p", c.p}}; },
                               [](const CorrelationRatio&) { return Json{{"kind", "corr"}}; }},
                    m);
}

AlphaMethod method_from_json(const Json& j, const std::string& where) {
  const std::string kind = kind_of(j, where);
  if (kind == "cof") return ChangeOfFrequency{read_or<double>(j, "p", 2.0, where)};
  if (kind == "corr") return CorrelationRatio{};
  bad(where + ".kind must be \"cof\" or \"corr\", got \"" + kind + "\"");
}

}  // namespace

ModelParams model_from_json(const Json& j) {
  const std::string w = "model";
  require_object(j, w);
  ModelParams p;
  const std::string noise = read_or<std::string>(j, "noise", "white", w);
  if (noise == "white") {
    p.noise_kind = NoiseKind::WhiteNoise;
  } else if (noise == "riesz") {
    p.noise_kind = NoiseKind::RieszKernel;
  } else {
    bad("model.noise must be \"white\" or \"riesz\", got \"" + noise + "\"");
  }
  p.kappa = read_or<double>(j, "kappa", 1.0, w);
  p.lambda = read_or<double>(j, "lambda", 1.0, w);
  p.alpha = read_or<double>(j, "alpha", 1.0, w);
  p.dim = read_or<int>(j, "dim", p.noise_kind == NoiseKind::WhiteNoise ? 1 : 2, w);
  return p;
}

Json to_json(const ModelParams& p) {
  return Json{{"kappa", p.kappa}, {"lambda", p.lambda}, {"alpha", p.alpha}, {"dim", p.dim},
              {"noise", noise_name(p.noise_kind)}};
}

SamplingScheme scheme_from_json(const Json& j) {
  const std::string w = "scheme";
  require_object(j, w);
  double delta = 0.0;
  if (j.contains("delta_log2")) {
    delta = std::ldexp(1.0, read<int>(j, "delta_log2", w));
  } else {
    delta = read<double>(j, "delta", w);
  }
  const double horizon = read_or<double>(j, "horizon", 1.0, w);
  const auto sites = read_or<std::vector<double>>(j, "sites", {0.0}, w);
  try {
    return SamplingScheme::on_line(delta, horizon, sites);
  } catch (const Error& e) {
    bad(std::string("scheme: ") + e.what());
  }
}

Json to_json(const SamplingScheme& s) {
  Json sites = Json::array();
  for (const auto& site : s.sites()) sites.push_back(site.size() == 1 ? Json(site[0]) : Json(site));
  return Json{{"delta", s.delta()}, {"horizon", s.horizon()}, {"sites", sites}};
}

VolatilityModel volatility_from_json(const Json& j) {
  const std::string w = "volatility";
  const std::string kind = kind_of(j, w);
  VolatilityModel v;
  if (kind == "constant") {
    v = ConstantVol{read_or<double>(j, "level", 1.0, w)};
  } else if (kind == "sinusoid") {
    v = SinusoidVol{read_or<double>(j, "base", 1.0, w), read_or<double>(j, "amplitude", 0.5, w),
                    read_or<double>(j, "frequency", 1.0, w), read_or<double>(j, "phase", 0.0, w)};
  } else if (kind == "ou_field") {
    v = OuFieldVol{read_or<double>(j, "theta", 1.0, w), read_or<double>(j, "eta", 0.5, w),
                   read_or<double>(j, "mean", 1.0, w), read_or<double>(j, "length", 0.5, w)};
  } else if (kind == "bounded_of_y") {
    v = TanhOfYVol{read_or<double>(j, "base", 1.0, w), read_or<double>(j, "amplitude", 0.5, w)};
  } else {
    bad("volatility.kind \"" + kind + "\" is not one of constant, sinusoid, ou_field, bounded_of_y");
  }
  try {
    validate_volatility(v);
  } catch (const Error& e) {
    bad(std::string("volatility: ") + e.what());
  }
  return v;
}

Json to_json(const VolatilityModel& v) {
  return std::visit(
      Overloaded{
          [](const ConstantVol& c) { return Json{{"kind", "constant"}, {"level", c.level}}; },
          [](const SinusoidVol& s) {
            return Json{{"kind", "sinusoid"}, {"base", s.base}, {"amplitude", s.amplitude},
                        {"frequency", s.frequency}, {"phase", s.phase}};
          },
          [](const OuFieldVol& o) {
            return Json{{"kind", "ou_field"}, {"theta", o.theta}, {"eta", o.eta}, {"mean", o.mean},
                        {"length", o.length}};
          },
          [](const TanhOfYVol& t) { return Json{{"kind", "bounded_of_y"}, {"base", t.base}, {"amplitude", t.amplitude}}; },
      },
      v);
}

MultipowerSpec spec_from_json(const Json& j, std::size_t num_sites) {
  const std::string w = "spec";
  const std::string kind = kind_of(j, w);
  try {
    if (kind == "power") return MultipowerSpec::power(read<double>(j, "p", w), num_sites);
    if (kind == "multipower") return MultipowerSpec::multipower(read<std::vector<double>>(j, "weights", w), num_sites);
    if (kind == "signed") return MultipowerSpec::signed_power(read<std::vector<double>>(j, "weights", w), num_sites);
    if (kind == "second_order") return MultipowerSpec::second_order(read<double>(j, "p", w), num_sites);
    if (kind == "corr_sum") return MultipowerSpec::corr_sum(num_sites);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidConfig) throw;
    bad(std::string("spec: ") + e.what());
  }
  bad("spec.kind \"" + kind + "\" is not one of power, multipower, signed, second_order, corr_sum");
}

Json to_json(const MultipowerSpec& s) {
  const auto row = s.weights().row(0);
  const std::vector<double> weights(row.begin(), row.end());
  switch (s.kind()) {
    case MultipowerKind::AbsolutePower:
      if (weights.size() == 1) return Json{{"kind", "power"}, {"p", weights[0]}};
      return Json{{"kind", "multipower"}, {"weights", weights}};
    case MultipowerKind::SignedPower:
      return Json{{"kind", "signed"}, {"weights", weights}};
    case MultipowerKind::SecondOrder:
      return Json{{"kind", "second_order"}, {"p", weights[0]}};
    case MultipowerKind::CorrSum:
      return Json{{"kind", "corr_sum"}};
  }
  return nullptr;
}

FdGridConfig grid_from_json(const Json& j, const ModelParams& model, const SamplingScheme& scheme) {
  const std::string w = "simulator";
  require_object(j, w);
  const double burn_in = read_or<double>(j, "burn_in", 0.0, w);
  FdGridConfig g = default_fd_grid(model, scheme, burn_in);
  g.dt = read_or<double>(j, "dt", g.dt, w);
  g.dx = read_or<double>(j, "dx", g.dx, w);
  g.domain_length = read_or<double>(j, "domain_length", g.domain_length, w);
  const std::string boundary = read_or<std::string>(j, "boundary", "dirichlet", w);
  if (boundary == "dirichlet") {
    g.boundary = Boundary::Dirichlet;
  } else if (boundary == "periodic") {
    g.boundary = Boundary::Periodic;
  } else {
    bad("simulator.boundary must be \"dirichlet\" or \"periodic\"");
  }
  if (j.contains("initial_condition")) {
    const Json& ic = j.at("initial_condition");
    const std::string wi = "simulator.initial_condition";
    require_object(ic, wi);
    g.initial_condition = InitialCondition{read_or<double>(ic, "amplitude", 0.0, wi),
                                           read_or<double>(ic, "centre", 0.0, wi), read_or<double>(ic, "width", 1.0, wi)};
  }
  return g;
}

Json to_json(const FdGridConfig& g) {
  return Json{{"kind", "fd"},
              {"dt", g.dt},
              {"dx", g.dx},
              {"domain_length", g.domain_length},
              {"boundary", g.boundary == Boundary::Dirichlet ? "dirichlet" : "periodic"},
              {"burn_in", g.burn_in},
              {"initial_condition",
               {{"amplitude", g.initial_condition.amplitude},
                {"centre", g.initial_condition.centre},
                {"width", g.initial_condition.width}}}};
}

SimulatorChoice simulator_from_json(const Json& j, const ModelParams& model, const SamplingScheme& scheme) {
  const std::string kind = kind_of(j, "simulator");
  if (kind == "exact") return ExactStationary{};
  if (kind == "fd") {
    FiniteDifference fd;
    fd.burn_in = read_or<double>(j, "burn_in", 0.0, "simulator");
    fd.grid = grid_from_json(j, model, scheme);
    return fd;
  }
  bad("simulator.kind must be \"exact\" or \"fd\", got \"" + kind + "\"");
}

Json to_json(const SimulatorChoice& s) {
  return std::visit(Overloaded{[](const ExactStationary&) { return Json{{"kind", "exact"}}; },
                               [](const FiniteDifference& f) {
                                 if (f.grid) return to_json(*f.grid);
                                 return Json{{"kind", "fd"}, {"burn_in", f.burn_in}};
                               }},
                    s);
}

Target target_from_json(const Json& j, std::size_t num_sites) {
  const std::string w = "target";
  const std::string kind = kind_of(j, w);
  auto spec = [&] {
    if (!j.contains("spec")) return MultipowerSpec::power(2.0, num_sites);
    return spec_from_json(j.at("spec"), num_sites);
  };
  if (kind == "lln") return LlnTarget{spec()};
  if (kind == "clt") return CltTarget{spec()};
  if (kind == "alpha_cof") return AlphaCofTarget{read_or<double>(j, "p", 2.0, w)};
  if (kind == "alpha_corr") return AlphaCorrTarget{};
  if (kind == "vol_known") return VolKnownTarget{spec()};
  if (kind == "vol_unknown") {
    VolUnknownTarget t{spec()};
    if (j.contains("alpha_method")) t.method = method_from_json(j.at("alpha_method"), "target.alpha_method");
    const std::string scaling = read_or<std::string>(j, "scaling", "delta_method", w);
    if (scaling == "delta_method") {
      t.scaling = UnknownAlphaScaling::DeltaMethod;
    } else if (scaling == "printed") {
      t.scaling = UnknownAlphaScaling::Printed;
    } else {
      bad("target.scaling must be \"delta_method\" or \"printed\"");
    }
    return t;
  }
  bad("target.kind \"" + kind + "\" is not one of lln, clt, alpha_cof, alpha_corr, vol_known, vol_unknown");
}

Json to_json(const Target& t) {
  return std::visit(
      Overloaded{
          [](const LlnTarget& x) { return Json{{"kind", "lln"}, {"spec", to_json(x.spec)}}; },
          [](const CltTarget& x) { return Json{{"kind", "clt"}, {"spec", to_json(x.spec)}}; },
          [](const AlphaCofTarget& x) { return Json{{"kind", "alpha_cof"}, {"p", x.p}}; },
          [](const AlphaCorrTarget&) { return Json{{"kind", "alpha_corr"}}; },
          [](const VolKnownTarget& x) { return Json{{"kind", "vol_known"}, {"spec", to_json(x.spec)}}; },
          [](const VolUnknownTarget& x) {
            return Json{{"kind", "vol_unknown"},
                        {"spec", to_json(x.spec)},
                        {"alpha_method", method_json(x.method)},
                        {"scaling", scaling_name(x.scaling)}};
          },
      },
      t);
}

Gate gate_from_json(const Json& j) {
  const std::string w = "gate";
  require_object(j, w);
  Gate g;
  auto opt = [&](const char* key) -> std::optional<double> {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return read<double>(j, key, w);
  };
  if (j.contains("coverage")) {
    const auto c = read<std::vector<double>>(j, "coverage", w);
    if (c.size() != 2) bad("gate.coverage must be [min, max]");
    g.coverage_min = c[0];
    g.coverage_max = c[1];
  }
  g.ks_pvalue_min = opt("ks_pvalue_min");
  g.max_abs_bias = opt("max_abs_bias");
  g.max_rmse = opt("max_rmse");
  g.max_relative_bias = opt("max_relative_bias");
  g.max_error_fraction = read_or<double>(j, "max_error_fraction", 0.01, w);
  return g;
}

Json to_json(const Gate& g) {
  Json j = Json::object();
  if (g.coverage_min && g.coverage_max) j["coverage"] = Json::array({*g.coverage_min, *g.coverage_max});
  if (g.ks_pvalue_min) j["ks_pvalue_min"] = *g.ks_pvalue_min;
  if (g.max_abs_bias) j["max_abs_bias"] = *g.max_abs_bias;
  if (g.max_rmse) j["max_rmse"] = *g.max_rmse;
  if (g.max_relative_bias) j["max_relative_bias"] = *g.max_relative_bias;
  j["max_error_fraction"] = g.max_error_fraction;
  return j;
}

ExperimentConfig config_from_json(const Json& j) {
  require_object(j, "config");
  ExperimentConfig c;
  c.model = model_from_json(j.contains("model") ? j.at("model") : Json::object());
  if (!j.contains("scheme")) bad("config.scheme is required");
  c.scheme = scheme_from_json(j.at("scheme"));
  if (j.contains("volatility")) c.volatility = volatility_from_json(j.at("volatility"));
  if (j.contains("simulator")) c.simulator = simulator_from_json(j.at("simulator"), c.model, c.scheme);
  if (!j.contains("target")) bad("config.target is required");
  c.target = target_from_json(j.at("target"), c.scheme.num_sites());
  const auto reps = read<long long>(j, "replications", "config");
  if (reps < 2) bad("config.replications must be at least 2");
  c.replications = static_cast<std::size_t>(reps);
  c.master_seed = read_or<std::uint64_t>(j, "master_seed", 1, "config");
  c.level = read_or<double>(j, "level", 0.95, "config");
  if (j.contains("gate")) c.gate = gate_from_json(j.at("gate"));
  validate_config(c);
  return c;
}

Json to_json(const ExperimentConfig& c) {
  return Json{{"model", to_json(c.model)},
              {"scheme", to_json(c.scheme)},
              {"volatility", to_json(c.volatility)},
              {"simulator", to_json(c.simulator)},
              {"target", to_json(c.target)},
              {"replications", c.replications},
              {"master_seed", c.master_seed},
              {"level", c.level},
              {"gate", to_json(c.gate)}};
}

Json to_json(const EstimateReport& r) {
  return Json{{"estimate", r.estimate},
              {"variance_hat", r.variance_hat},
              {"ci", interval_json(r.ci)},
              {"level", r.level},
              {"studentized", optional_number(r.studentized)},
              {"degenerate", r.degenerate},
              {"warnings", r.warnings}};
}

Json to_json(const AlphaEstimate& a) {
  Json j{{"method", method_name(a.method)}};
  if (const auto* c = std::get_if<ChangeOfFrequency>(&a.method)) j["p"] = c->p;
  j["estimate"] = a.report.estimate;
  j["per_site"] = a.per_site;
  j["variance_hat"] = a.report.variance_hat;
  j["ci"] = interval_json(a.report.ci);
  j["level"] = a.report.level;
  j["studentized"] = optional_number(a.report.studentized);
  j["degenerate"] = a.report.degenerate;
  j["clipped"] = a.clipped;
  j["warnings"] = a.report.warnings;
  return j;
}

Json to_json(const VolatilityEstimate& v) {
  Json sites = Json::array();
  std::vector<double> estimates;
  bool degenerate = false;
  for (const auto& r : v.per_site) {
    sites.push_back(to_json(r));
    estimates.push_back(r.estimate);
    degenerate = degenerate || r.degenerate;
  }
  Json j{{"estimate", estimates.size() == 1 ? Json(estimates[0]) : Json(estimates)},
         {"per_site", sites},
         {"degenerate", degenerate},
         {"alpha_used", v.alpha_used},
         {"rate", v.rate == RateTag::Root ? "root" : "root_log"}};
  if (v.alpha_estimate) j["alpha_estimate"] = to_json(*v.alpha_estimate);
  j["warnings"] = v.warnings;
  return j;
}

Json to_json(const McReport& r) {
  Json per = Json::array();
  for (const auto& e : r.per_replication)
    per.push_back(Json{{"replication", e.replication},
                       {"site", e.site},
                       {"estimate", e.estimate},
                       {"truth", e.truth},
                       {"studentized", optional_number(e.studentized)},
                       {"ci", interval_json(e.ci)},
                       {"hit", e.hit}});
  Json errors = Json::array();
  for (const auto& e : r.errors)
    errors.push_back(Json{{"replication", e.replication}, {"code", e.code}, {"message", e.message}});
  const McSummary& s = r.summary;
  Json summary{{"count", s.count},
               {"mean", s.mean},
               {"mean_truth", s.mean_truth},
               {"bias", s.bias},
               {"relative_bias", s.relative_bias},
               {"rmse", s.rmse},
               {"coverage", optional_number(s.coverage)},
               {"coverage_ci", interval_json(s.coverage_ci)},
               {"ks_statistic", optional_number(s.ks_statistic)},
               {"ks_pvalue", optional_number(s.ks_pvalue)},
               {"studentized_mean", s.studentized_mean},
               {"studentized_sd", s.studentized_sd}};
  Json gate = Json::array();
  for (const auto& g : r.gate) gate.push_back(Json{{"name", g.name}, {"value", g.value}, {"passed", g.passed}});
  return Json{{"target", r.target},
              {"replications", r.replications},
              {"truth", optional_number(r.truth)},
              {"summary", summary},
              {"gate", gate},
              {"passed", r.passed},
              {"errors", errors},
              {"per_replication", per}};
}

}  // namespace hfvol
