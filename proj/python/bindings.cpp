#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hfvol/constants.hpp"
#include "hfvol/estimators.hpp"
#include "hfvol/ingest.hpp"
#include "hfvol/json_io.hpp"
#include "hfvol/montecarlo.hpp"
#include "hfvol/simulator.hpp"
#include "hfvol/special_functions.hpp"

namespace py = pybind11;
using namespace hfvol;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

ModelParams make_model(double alpha, double lambda, double kappa, int dim, const std::string& noise) {
  if (noise != "white" && noise != "riesz") fail(ErrorCode::InvalidConfig, "noise must be white or riesz");
  return validate_params({kappa, lambda, alpha, dim, noise == "white" ? NoiseKind::WhiteNoise : NoiseKind::RieszKernel});
}

ObservedPath make_path(const Array& levels, double delta, std::optional<std::vector<double>> sites) {
  const auto buf = levels.request();
  if (buf.ndim != 1 && buf.ndim != 2) fail(ErrorCode::InvalidConfig, "levels must be 1-D or 2-D");
  const std::size_t rows = static_cast<std::size_t>(buf.shape[0]);
  const std::size_t cols = buf.ndim == 2 ? static_cast<std::size_t>(buf.shape[1]) : 1;
  if (rows < 3) fail(ErrorCode::TooFewIncrements, "need at least 3 rows");
  std::vector<double> xs;
  if (sites) {
    xs = *sites;
  } else {
    for (std::size_t m = 0; m < cols; ++m) xs.push_back(static_cast<double>(m));
  }
  if (xs.size() != cols) fail(ErrorCode::SpecMismatch, "sites must match the number of level columns");
  const auto* p = static_cast<const double*>(buf.ptr);
  Matrix m(rows, cols, std::vector<double>(p, p + rows * cols));
  return ObservedPath(SamplingScheme::on_line(delta, static_cast<double>(rows - 1) * delta, std::move(xs)),
                      std::move(m));
}

py::tuple path_tuple(const ObservedPath& path) {
  const auto& lv = path.levels();
  Array out({lv.rows(), lv.cols()});
  std::copy(lv.data().begin(), lv.data().end(), out.mutable_data());
  std::vector<double> xs;
  for (std::size_t m = 0; m < path.scheme().num_sites(); ++m) xs.push_back(path.scheme().site_x(m));
  return py::make_tuple(out, path.scheme().delta(), xs);
}

MultipowerSpec make_spec(double p, const std::vector<double>& weights, std::size_t sites) {
  return weights.empty() ? MultipowerSpec::power(p, sites) : MultipowerSpec::multipower(weights, sites);
}

AlphaMethod make_method(const std::string& name, double p) {
  if (name == "cof") return ChangeOfFrequency{p};
  if (name == "corr") return CorrelationRatio{};
  fail(ErrorCode::InvalidConfig, "method must be cof or corr");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Volatility and noise-index estimation for the stochastic heat equation";

  static py::exception<Error> error(m, "HfvolError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(error.ptr(), e.what());
    }
  });

  m.def("gamma_weight", &gamma_weight, py::arg("alpha"), py::arg("r"));
  m.def("gamma_weights", &gamma_weights, py::arg("alpha"), py::arg("max_lag"));
  m.def("gamma_weight_n", &gamma_weight_n, py::arg("alpha"), py::arg("lam"), py::arg("delta"), py::arg("r"));
  m.def(
      "tau_sq",
      [](double alpha, double lambda, double delta, double kappa, int dim, const std::string& noise, bool leading) {
        const auto p = make_model(alpha, lambda, kappa, dim, noise);
        return leading ? tau_sq_leading(p, delta) : tau_sq_exact(p, delta);
      },
      py::arg("alpha"), py::arg("lam"), py::arg("delta"), py::arg("kappa") = 1.0, py::arg("dim") = 1,
      py::arg("noise") = "white", py::arg("leading") = false);
  m.def(
      "big_R", [](double p, double alpha) { return big_R(p, alpha); }, py::arg("p"), py::arg("alpha"));
  m.def("gaussian_abs_moment", &gaussian_abs_moment, py::arg("p"));
  m.def(
      "c0_constants",
      [](double p, double alpha) {
        const auto c = c0_constants(p, alpha);
        py::dict d;
        d["c11"] = c.c11;
        d["c12"] = c.c12;
        d["c22"] = c.c22;
        d["c0"] = c.c0;
        d["tilde_c0"] = *c0_tilde_constants(alpha).tilde_c0;
        return d;
      },
      py::arg("p"), py::arg("alpha"));

  m.def(
      "simulate",
      [](const std::string& config, std::uint64_t seed, std::uint64_t replication) {
        Json j;
        try {
          j = Json::parse(config);
        } catch (const nlohmann::json::parse_error& e) {
          fail(ErrorCode::InvalidConfig, std::string("malformed JSON: ") + e.what());
        }
        const auto model = model_from_json(j.value("model", Json::object()));
        if (!j.contains("scheme")) fail(ErrorCode::InvalidConfig, "config.scheme is required");
        const auto scheme = scheme_from_json(j.at("scheme"));
        const auto vol = j.contains("volatility") ? volatility_from_json(j.at("volatility")) : VolatilityModel{ConstantVol{}};
        const auto sim = j.contains("simulator") ? simulator_from_json(j.at("simulator"), model, scheme) : SimulatorChoice{};
        const SeedSpec s{seed, replication};
        std::optional<ObservedPath> path;
        {
          py::gil_scoped_release release;
          path = std::holds_alternative<ExactStationary>(sim)
                     ? simulate_exact_stationary(model, scheme, vol, s)
                     : simulate_fd(model, scheme, vol, *std::get<FiniteDifference>(sim).grid, s);
        }
        return path_tuple(*path);
      },
      py::arg("config"), py::arg("seed") = 0, py::arg("replication") = 0);

  m.def(
      "parse_path_csv", [](const std::string& text, double rtol) { return path_tuple(parse_path_csv(text, rtol).first); },
      py::arg("text"), py::arg("rtol") = 1e-9);
  m.def(
      "format_path_csv",
      [](const Array& levels, double delta, std::optional<std::vector<double>> sites) {
        return format_path_csv(make_path(levels, delta, std::move(sites)));
      },
      py::arg("levels"), py::arg("delta"), py::arg("sites") = py::none());

  m.def(
      "estimate_alpha",
      [](const Array& levels, double delta, const std::string& method, double p, double level,
         std::optional<double> reference, std::optional<std::vector<double>> sites) {
        const auto path = make_path(levels, delta, std::move(sites));
        return to_json(estimate_alpha(path, make_method(method, p), level, reference)).dump();
      },
      py::arg("levels"), py::arg("delta"), py::arg("method") = "cof", py::arg("p") = 2.0, py::arg("level") = 0.95,
      py::arg("reference") = py::none(), py::arg("sites") = py::none());

  m.def(
      "estimate_vol_known",
      [](const Array& levels, double delta, double alpha, double p, std::vector<double> weights, double kappa, int dim,
         double level, std::optional<std::vector<double>> sites) {
        const auto path = make_path(levels, delta, std::move(sites));
        const auto spec = make_spec(p, weights, path.scheme().num_sites());
        return to_json(estimate_vol_known_alpha(path, spec, alpha, kappa, dim, level)).dump();
      },
      py::arg("levels"), py::arg("delta"), py::arg("alpha"), py::arg("p") = 2.0,
      py::arg("weights") = std::vector<double>{}, py::arg("kappa") = 1.0, py::arg("dim") = 1, py::arg("level") = 0.95,
      py::arg("sites") = py::none());

  m.def(
      "estimate_vol_unknown",
      [](const Array& levels, double delta, double p, std::vector<double> weights, double kappa, int dim, double level,
         const std::string& alpha_method, double p0, const std::string& scaling,
         std::optional<std::vector<double>> sites) {
        const auto path = make_path(levels, delta, std::move(sites));
        const auto spec = make_spec(p, weights, path.scheme().num_sites());
        if (scaling != "delta" && scaling != "printed") fail(ErrorCode::InvalidConfig, "scaling must be delta or printed");
        const auto sc = scaling == "printed" ? UnknownAlphaScaling::Printed : UnknownAlphaScaling::DeltaMethod;
        return to_json(estimate_vol_unknown_alpha(path, spec, kappa, make_method(alpha_method, p0), dim, level, sc))
            .dump();
      },
      py::arg("levels"), py::arg("delta"), py::arg("p") = 2.0, py::arg("weights") = std::vector<double>{},
      py::arg("kappa") = 1.0, py::arg("dim") = 1, py::arg("level") = 0.95, py::arg("alpha_method") = "cof",
      py::arg("p0") = 2.0, py::arg("scaling") = "delta", py::arg("sites") = py::none());

  m.def(
      "run_experiment",
      [](const std::string& config, std::size_t workers) {
        const auto cfg = parse_experiment_config(config);
        py::gil_scoped_release release;
        return report_to_json(run_experiment(cfg, workers));
      },
      py::arg("config"), py::arg("workers") = 0);
}
