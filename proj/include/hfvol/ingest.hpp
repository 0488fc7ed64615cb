#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "hfvol/model.hpp"

namespace hfvol {

struct IngestReport {
  double inferred_delta = 0.0;
  std::size_t n_times = 0;
  std::size_t n_sites = 0;
  std::vector<std::string> warnings;
};

/// Parses `t,x=<x1>,...,x=<xN>` CSV text. delta is the median time gap;
/// every gap must lie within rtol * delta of it. The scheme's horizon is
/// (rows - 1) * delta.
std::pair<ObservedPath, IngestReport> parse_path_csv(const std::string& text, double rtol = 1e-9);

std::pair<ObservedPath, IngestReport> read_path_csv(const std::filesystem::path& file, double rtol = 1e-9);

/// Rows t = i * delta, values with 17 significant digits, LF endings.
std::string format_path_csv(const ObservedPath& path);

void write_path_csv(const std::filesystem::path& file, const ObservedPath& path);

}  // namespace hfvol
