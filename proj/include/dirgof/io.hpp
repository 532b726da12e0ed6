#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "dirgof/core.hpp"
#include "dirgof/sphere.hpp"

namespace dirgof::io {

/// 17 significant digits, '.' separator, independent of the locale.
inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline double parse_number(const std::string& field, std::size_t row, std::size_t col) {
  std::string s = field;
  s.erase(0, s.find_first_not_of(" \t\r"));
  s.erase(s.find_last_not_of(" \t\r") + 1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::data_error, "row " + std::to_string(row) + ", column " +
                                           std::to_string(col) + ": cannot parse '" + field + "'");
  }
  return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

/// Reads x1..x{q+1},y with a header row. Predictors with | |x| - 1 | <= tol
/// are renormalized; anything further off the sphere is a data error.
inline DirLinSample read_sample_csv(const std::string& path, double tol = 1e-6) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::data_error, "cannot open '" + path + "'");
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    header = split_csv_line(line);
    break;
  }
  if (header.empty()) throw Error(ErrorCode::data_error, "'" + path + "' is empty: 0 data rows");
  const std::size_t cols = header.size();
  if (cols < 3) {
    throw Error(ErrorCode::data_error,
                "need at least 3 columns (x1, x2, y), header has " + std::to_string(cols));
  }

  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != cols) {
      throw Error(ErrorCode::data_error, "line " + std::to_string(line_no) + " has " +
                                             std::to_string(fields.size()) + " fields, expected " +
                                             std::to_string(cols));
    }
    for (std::size_t c = 0; c < cols; ++c) values.push_back(parse_number(fields[c], line_no, c + 1));
    ++rows;
  }
  if (rows == 0) throw Error(ErrorCode::data_error, "'" + path + "' has 0 data rows");

  const auto n = static_cast<Eigen::Index>(rows);
  const auto d = static_cast<Eigen::Index>(cols - 1);
  PointMatrix x(n, d);
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = values[static_cast<std::size_t>(i * (d + 1) + j)];
    y[i] = values[static_cast<std::size_t>(i * (d + 1) + d)];
    const double nrm = x.row(i).norm();
    if (std::abs(nrm - 1.0) > tol) {
      throw Error(ErrorCode::data_error, "data row " + std::to_string(i + 1) +
                                             ": predictor norm " + format_number(nrm) +
                                             " is not within " + format_number(tol) + " of 1");
    }
    x.row(i) /= nrm;
  }
  return DirLinSample(std::move(x), std::move(y));
}

inline void write_sample_csv(const std::string& path, const DirLinSample& sample) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::data_error, "cannot write '" + path + "'");
  for (Eigen::Index j = 0; j < sample.x.cols(); ++j) out << 'x' << (j + 1) << ',';
  out << "y\n";
  for (Eigen::Index i = 0; i < sample.size(); ++i) {
    for (Eigen::Index j = 0; j < sample.x.cols(); ++j) out << format_number(sample.x(i, j)) << ',';
    out << format_number(sample.y[i]) << '\n';
  }
}

/// Writes to `path`, or to stdout when the path is empty or "-".
inline void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::data_error, "cannot write '" + path + "'");
  out << text;
}

}  // namespace dirgof::io
