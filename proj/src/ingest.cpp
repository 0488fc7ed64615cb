#include "hfvol/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace hfvol {

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::pair<ObservedPath, IngestReport> parse_path_csv(const std::string& text, double rtol) {
  if (!(rtol >= 0.0)) fail(ErrorCode::ConstraintViolation, "rtol must be nonnegative");
  std::vector<std::string_view> lines;
  {
    std::string_view rest(text);
    while (!rest.empty()) {
      const std::size_t nl = rest.find('\n');
      std::string_view line = rest.substr(0, nl);
      if (!trim(line).empty()) lines.push_back(line);
      if (nl == std::string_view::npos) break;
      rest.remove_prefix(nl + 1);
    }
  }
  if (lines.empty()) fail(ErrorCode::HeaderMalformed, "file is empty");

  const auto header = split(lines[0]);
  if (header.size() < 2 || trim(header[0]) != "t")
    fail(ErrorCode::HeaderMalformed, "header must start with \"t\" followed by x=<coordinate> columns");
  std::vector<double> sites;
  for (std::size_t c = 1; c < header.size(); ++c) {
    const auto h = trim(header[c]);
    const auto x = h.substr(0, 2) == "x=" ? parse_number(h.substr(2)) : std::nullopt;
    if (!x) {
      std::ostringstream os;
      os << "column " << c + 1 << " header \"" << h << "\" is not x=<number>";
      fail(ErrorCode::HeaderMalformed, os.str());
    }
    sites.push_back(*x);
  }

  const std::size_t rows = lines.size() - 1;
  if (rows < 3) fail(ErrorCode::TooFewIncrements, "need at least 3 data rows");
  std::vector<double> times(rows);
  Matrix levels(rows, sites.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const auto cells = split(lines[r + 1]);
    if (cells.size() != header.size()) {
      std::ostringstream os;
      os << "row " << r + 1 << " has " << cells.size() << " cells, header has " << header.size();
      fail(ErrorCode::MissingValue, os.str());
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto v = parse_number(cells[c]);
      if (!v) {
        std::ostringstream os;
        os << "missing or non-finite value at row " << r + 1 << ", column " << c + 1 << " (\"" << trim(cells[c])
           << "\")";
        fail(ErrorCode::MissingValue, os.str());
      }
      if (c == 0) {
        times[r] = *v;
      } else {
        levels(r, c - 1) = *v;
      }
    }
  }

  std::vector<double> gaps(rows - 1);
  for (std::size_t r = 0; r + 1 < rows; ++r) gaps[r] = times[r + 1] - times[r];
  std::vector<double> sorted = gaps;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double delta = sorted[sorted.size() / 2];
  if (!(delta > 0.0)) fail(ErrorCode::IrregularGrid, "time column is not increasing");
  for (std::size_t r = 0; r < gaps.size(); ++r) {
    if (std::abs(gaps[r] - delta) > rtol * delta) {
      std::ostringstream os;
      os << "gap between rows " << r + 1 << " and " << r + 2 << " is " << gaps[r] << ", expected " << delta;
      fail(ErrorCode::IrregularGrid, os.str());
    }
  }

  IngestReport report{delta, rows, sites.size(), {}};
  if (times[0] != 0.0) report.warnings.push_back("time column starts at " + fmt17(times[0]) + ", not 0");
  const double horizon = static_cast<double>(rows - 1) * delta;
  return {ObservedPath(SamplingScheme::on_line(delta, horizon, sites), std::move(levels)), std::move(report)};
}

std::pair<ObservedPath, IngestReport> read_path_csv(const std::filesystem::path& file, double rtol) {
  std::ifstream in(file, std::ios::binary);
  if (!in) fail(ErrorCode::InvalidConfig, "cannot open " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_path_csv(ss.str(), rtol);
}

std::string format_path_csv(const ObservedPath& path) {
  const auto& scheme = path.scheme();
  std::string out = "t";
  for (std::size_t m = 0; m < scheme.num_sites(); ++m) out += ",x=" + fmt17(scheme.site_x(m));
  out += '\n';
  const Matrix& lv = path.levels();
  for (std::size_t r = 0; r < lv.rows(); ++r) {
    out += fmt17(static_cast<double>(r) * scheme.delta());
    for (std::size_t m = 0; m < lv.cols(); ++m) out += ',' + fmt17(lv(r, m));
    out += '\n';
  }
  return out;
}

void write_path_csv(const std::filesystem::path& file, const ObservedPath& path) {
  std::ofstream out(file, std::ios::binary);
  if (!out) fail(ErrorCode::InvalidConfig, "cannot write " + file.string());
  out << format_path_csv(path);
  if (!out) fail(ErrorCode::InvalidConfig, "write failed for " + file.string());
}

}  // namespace hfvol
