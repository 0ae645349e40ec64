#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "scte/errors.hpp"
#include "scte/linalg.hpp"
#include "scte/oracle.hpp"

namespace scte {

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_field(const std::string& s, std::size_t row, std::size_t col) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\r')) ++pos;
    if (pos != s.size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    throw ParseError("bad numeric field at row " + std::to_string(row + 1) + ", column " +
                     std::to_string(col + 1) + ": '" + s + "'");
  }
}

inline std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace detail

// ---- covariates: one row per individual, d decimal fields, optional header.

inline void save_covariates(const std::string& path, const Matrix& x, bool header = false) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open for writing: " + path);
  if (header) {
    for (Index j = 0; j < x.cols(); ++j) out << (j ? ",x" : "x") << j;
    out << '\n';
  }
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < x.cols(); ++j) {
      if (j) out << ',';
      out << format_double(x(i, j));
    }
    out << '\n';
  }
}

inline Matrix load_covariates(const std::string& path, bool header = false) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  if (header && std::getline(in, line)) ++lineno;
  while (std::getline(in, line)) {
    line = detail::strip_cr(line);
    if (line.empty()) continue;
    auto fields = detail::split_csv_line(line);
    std::vector<double> row;
    row.reserve(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c)
      row.push_back(detail::parse_field(fields[c], lineno, c));
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError("ragged row at line " + std::to_string(lineno + 1));
    rows.push_back(std::move(row));
    ++lineno;
  }
  if (rows.empty()) throw ParseError("empty covariate file: " + path);
  Matrix x(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows.front().size(); ++j)
      x(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  return x;
}

// ---- outcomes: header `y1,y0` and two columns, or header `y0` and one
// column (ground-truth y1 then comes from a constant shift).

struct LoadedOutcomes {
  std::optional<Vector> y1;
  Vector y0;
};

inline void save_outcomes(const std::string& path, const PotentialOutcomes& po) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open for writing: " + path);
  out << "y1,y0\n";
  for (Index i = 0; i < po.n(); ++i)
    out << format_double(po.y1(i)) << ',' << format_double(po.y0(i)) << '\n';
}

inline LoadedOutcomes load_outcomes(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty outcomes file: " + path);
  line = detail::strip_cr(line);
  auto header = detail::split_csv_line(line);
  bool both;
  if (header.size() == 2 && header[0] == "y1" && header[1] == "y0")
    both = true;
  else if (header.size() == 1 && header[0] == "y0")
    both = false;
  else
    throw ParseError("outcomes header must be 'y1,y0' or 'y0', got '" + line + "'");

  std::vector<double> v1, v0;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    line = detail::strip_cr(line);
    if (line.empty()) continue;
    auto fields = detail::split_csv_line(line);
    if (fields.size() != (both ? 2u : 1u))
      throw ParseError("expected " + std::to_string(both ? 2 : 1) + " columns at line " +
                       std::to_string(lineno + 1));
    if (both) {
      v1.push_back(detail::parse_field(fields[0], lineno, 0));
      v0.push_back(detail::parse_field(fields[1], lineno, 1));
    } else {
      v0.push_back(detail::parse_field(fields[0], lineno, 0));
    }
    ++lineno;
  }
  if (v0.empty()) throw ParseError("no outcome rows in " + path);
  LoadedOutcomes out;
  out.y0 = Eigen::Map<Vector>(v0.data(), static_cast<Index>(v0.size()));
  if (both) out.y1 = Eigen::Map<Vector>(v1.data(), static_cast<Index>(v1.size()));
  return out;
}

// ---- dataset = covariates + outcomes, normalized on ingest.

struct Dataset {
  CovariateMatrix x;
  PotentialOutcomes outcomes;
  double norm_scale = 1.0;  // max row norm of the raw covariates
};

inline void save_dataset(const std::string& x_path, const std::string& y_path,
                         const CovariateMatrix& x, const PotentialOutcomes& po,
                         bool header = false) {
  save_covariates(x_path, x.data, header);
  save_outcomes(y_path, po);
}

/// Loads and row-normalizes a dataset. `shift`, when present, overrides y1
/// with y0 + shift (the constant-treatment-effect ingestion mode).
inline Dataset load_dataset(const std::string& x_path, const std::string& y_path,
                            bool header = false,
                            std::optional<double> shift = std::nullopt) {
  Dataset ds;
  const Matrix raw = load_covariates(x_path, header);
  ds.norm_scale = raw.rowwise().norm().maxCoeff();
  if (ds.norm_scale == 0.0) throw ZeroMatrix("load_dataset: all covariate rows are zero");
  if (std::abs(ds.norm_scale - 1.0) <= 1e-12) {
    // Already normalized; keep the stored values bit-exact.
    ds.x = CovariateMatrix{raw, true};
  } else {
    ds.x = row_normalize(raw);
  }
  LoadedOutcomes lo = load_outcomes(y_path);
  if (lo.y0.size() != ds.x.n())
    throw DimensionMismatch("load_dataset: outcome rows != covariate rows");
  ds.outcomes.y0 = lo.y0;
  if (shift.has_value())
    ds.outcomes.y1 = lo.y0.array() + *shift;
  else if (lo.y1.has_value())
    ds.outcomes.y1 = *lo.y1;
  else
    throw MissingGroundTruth("load_dataset: single-outcome file needs a constant shift");
  return ds;
}

}  // namespace scte
