#pragma once

#include <optional>
#include <vector>

#include "hfvol/model.hpp"

namespace hfvol {

struct VariationResult {
  std::vector<double> per_site;
  std::optional<Matrix> partial;  // row i: running value after the first i + 1 terms
  double normalizer_used = 1.0;
  MultipowerSpec spec;
};

/// Row i = Y(i delta) - Y((i - 1) delta), one column per site.
Matrix increments(const ObservedPath& path);

/// delta * sum_{i} f_m(dY_i / tau, ..., dY_{i+L-1} / tau) per site, with the
/// L - 1 trailing increments dropped.
VariationResult variation(const ObservedPath& path, const MultipowerSpec& spec, double tau, bool with_partial = false);

/// sum |dY_i + dY_{i+1}|^p / sum |dY_i|^p per site.
std::vector<double> variation_ratio_cof(const ObservedPath& path, double p);

}  // namespace hfvol
