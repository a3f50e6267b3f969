#pragma once

#include "kryreg/dataset.hpp"
#include "kryreg/error.hpp"
#include "kryreg/types.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace kryreg::bench {

struct CsvSchema {
  /// Empty means every column other than the target.
  std::vector<std::string> feature_columns;
  /// Empty means the file carries no targets.
  std::string target_column;
  /// A field equal to this (or empty) is missing; its row is dropped.
  std::string missing_sentinel = "NaN";
  /// Min-max scale every feature column to [0, 1].
  bool scale_features = true;
  /// Keep rows whose only missing field is the target, as prediction sites.
  bool collect_unlabeled = false;
};

struct IngestResult {
  Dataset data;
  /// Rows with complete features but a missing target (collect_unlabeled).
  std::optional<Dataset> unlabeled;
  Index dropped_rows = 0;
  std::vector<std::string> feature_names;
  /// Per-feature min and max before scaling.
  Vector feature_min;
  Vector feature_max;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                            : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::optional<double> parse_number(std::string_view field) {
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace detail

/// Reads a header-first CSV into a Dataset. Rows with a missing feature or
/// target are dropped and counted.
inline IngestResult ingest_csv(const std::string& path, const CsvSchema& schema = {}) {
  std::ifstream in(path);
  if (!in) throw IoError("ingest_csv: cannot open '" + path + "'");

  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    for (std::string_view f : detail::split_fields(line)) header.emplace_back(f);
    break;
  }
  if (header.empty()) throw EmptyDataset("ingest_csv: '" + path + "' has no header");

  const auto column_of = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ParseError("ingest_csv: unknown column '" + name + "'", 1);
    return static_cast<std::size_t>(it - header.begin());
  };

  std::optional<std::size_t> target_col;
  if (!schema.target_column.empty()) target_col = column_of(schema.target_column);
  std::vector<std::size_t> feature_cols;
  IngestResult out;
  if (schema.feature_columns.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (!target_col || c != *target_col) feature_cols.push_back(c);
  } else {
    for (const std::string& name : schema.feature_columns) feature_cols.push_back(column_of(name));
  }
  if (feature_cols.empty()) throw ParseError("ingest_csv: no feature columns", 1);
  for (std::size_t c : feature_cols) out.feature_names.push_back(header[c]);

  std::vector<double> coords;
  std::vector<double> targets;
  std::vector<double> unlabeled_coords;
  Index rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_fields(line);
    if (fields.size() != header.size())
      throw ParseError("ingest_csv: expected " + std::to_string(header.size()) + " fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    const auto is_missing = [&](std::string_view f) { return f.empty() || f == schema.missing_sentinel; };
    bool missing = false;
    for (std::size_t c : feature_cols) missing = missing || is_missing(fields[c]);
    const bool target_missing = target_col && is_missing(fields[*target_col]);
    const bool unlabeled = !missing && target_missing && schema.collect_unlabeled;
    if ((missing || target_missing) && !unlabeled) {
      ++out.dropped_rows;
      continue;
    }
    const auto value = [&](std::size_t c) {
      const auto v = detail::parse_number(fields[c]);
      if (!v)
        throw ParseError("ingest_csv: malformed value '" + std::string(fields[c]) + "' in column '" +
                             header[c] + "'",
                         line_no);
      return *v;
    };
    if (unlabeled) {
      for (std::size_t c : feature_cols) unlabeled_coords.push_back(value(c));
      continue;
    }
    for (std::size_t c : feature_cols) coords.push_back(value(c));
    if (target_col) targets.push_back(value(*target_col));
    ++rows;
  }
  if (rows == 0) throw EmptyDataset("ingest_csv: '" + path + "' has no complete rows");

  const auto d = static_cast<Index>(feature_cols.size());
  const auto nu = static_cast<Index>(unlabeled_coords.size()) / d;
  Matrix pts = Eigen::Map<const Matrix>(coords.data(), d, rows);
  Matrix upts = Eigen::Map<const Matrix>(unlabeled_coords.data(), d, nu);
  out.feature_min = pts.rowwise().minCoeff();
  out.feature_max = pts.rowwise().maxCoeff();
  if (nu > 0) {
    out.feature_min = out.feature_min.cwiseMin(upts.rowwise().minCoeff());
    out.feature_max = out.feature_max.cwiseMax(upts.rowwise().maxCoeff());
  }
  if (schema.scale_features) {
    for (Index k = 0; k < d; ++k) {
      const double lo = out.feature_min(k);
      const double span = out.feature_max(k) - lo;
      if (span > 0.0) {
        pts.row(k) = (pts.row(k).array() - lo) / span;
        upts.row(k) = (upts.row(k).array() - lo) / span;
      } else {
        pts.row(k).setZero();
        upts.row(k).setZero();
      }
    }
  }
  if (nu > 0) out.unlabeled = Dataset(std::move(upts));
  std::optional<Vector> y;
  if (target_col) y = Eigen::Map<const Vector>(targets.data(), rows);
  out.data = Dataset(std::move(pts), std::move(y));
  return out;
}

/// Writes a Dataset as CSV with round-trip precision. Columns are x0..x{d-1}
/// and, when present, y.
inline void write_csv(const Dataset& data, const std::string& path,
                      const std::string& target_name = "y") {
  std::ofstream out(path);
  if (!out) throw IoError("write_csv: cannot open '" + path + "'");
  for (Index k = 0; k < data.d(); ++k) out << (k ? "," : "") << 'x' << k;
  if (data.has_targets()) out << ',' << target_name;
  out << '\n';
  char buf[32];
  const auto put = [&](double v) {
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.write(buf, ptr - buf);
  };
  for (Index i = 0; i < data.n(); ++i) {
    for (Index k = 0; k < data.d(); ++k) {
      if (k) out << ',';
      put(data.points()(k, i));
    }
    if (data.has_targets()) {
      out << ',';
      put(data.targets()(i));
    }
    out << '\n';
  }
  if (!out) throw IoError("write_csv: write to '" + path + "' failed");
}

}  // namespace kryreg::bench
