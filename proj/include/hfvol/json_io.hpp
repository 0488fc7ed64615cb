#pragma once

#include "json.hpp"

#include "hfvol/estimators.hpp"
#include "hfvol/model.hpp"
#include "hfvol/montecarlo.hpp"
#include "hfvol/simulator.hpp"

namespace hfvol {

using Json = nlohmann::ordered_json;

// Readers throw InvalidConfig naming the offending field.

ModelParams model_from_json(const Json& j);
Json to_json(const ModelParams& p);

/// {"delta": d | "delta_log2": k, "horizon": T, "sites": [x...]}
SamplingScheme scheme_from_json(const Json& j);
Json to_json(const SamplingScheme& s);

/// {"kind": "constant" | "sinusoid" | "ou_field" | "bounded_of_y", ...parameters}
VolatilityModel volatility_from_json(const Json& j);
Json to_json(const VolatilityModel& v);

/// {"kind": "power", "p"} | {"kind": "multipower" | "signed", "weights": [...]} |
/// {"kind": "second_order", "p"} | {"kind": "corr_sum"}; rows repeated per site.
MultipowerSpec spec_from_json(const Json& j, std::size_t num_sites);
Json to_json(const MultipowerSpec& s);

/// Missing fields fall back to default_fd_grid(model, scheme, burn_in).
FdGridConfig grid_from_json(const Json& j, const ModelParams& model, const SamplingScheme& scheme);
Json to_json(const FdGridConfig& g);

SimulatorChoice simulator_from_json(const Json& j, const ModelParams& model, const SamplingScheme& scheme);
Json to_json(const SimulatorChoice& s);

Target target_from_json(const Json& j, std::size_t num_sites);
Json to_json(const Target& t);

Gate gate_from_json(const Json& j);
Json to_json(const Gate& g);

ExperimentConfig config_from_json(const Json& j);
Json to_json(const ExperimentConfig& c);

Json to_json(const EstimateReport& r);
Json to_json(const AlphaEstimate& a);
Json to_json(const VolatilityEstimate& v);
Json to_json(const McReport& r);

}  // namespace hfvol
