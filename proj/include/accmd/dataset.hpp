#pragma once

#include <cstddef>
#include <fstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "accmd/common.hpp"
#include "accmd/format.hpp"
#include "accmd/linalg.hpp"

namespace accmd {

enum class DataFormat { csv, svmlight };

// Regression data: design matrix (samples x features) plus response vector.
struct Dataset {
  DenseMatrix features{0, 0};
  Vector response;

  std::size_t rows() const { return features.rows; }
  std::size_t cols() const { return features.cols; }
};

namespace detail {

[[noreturn]] inline void parse_fail(const std::string& path, std::size_t line,
                                    const std::string& msg) {
  throw config_error(path + ":" + std::to_string(line) + ": " + msg);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

inline bool blank(std::string_view s) {
  for (char c : s)
    if (c != ' ' && c != '\t' && c != '\r') return false;
  return true;
}

}  // namespace detail

// CSV layout: first column response, remaining columns features; an optional
// header row is detected by failing to parse as numbers.
inline Dataset load_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open dataset file: " + path);

  std::vector<Vector> rows;
  Vector response;
  std::size_t width = 0;
  std::size_t line_no = 0;
  bool saw_first = false;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::blank(line)) continue;
    const auto fields = detail::split(line, ',');
    if (!saw_first) {
      saw_first = true;
      bool all_numeric = true;
      double tmp;
      for (auto f : fields)
        if (!try_parse_double(f, tmp)) {
          all_numeric = false;
          break;
        }
      if (!all_numeric) continue;  // header row
    }
    if (fields.size() < 2)
      detail::parse_fail(path, line_no,
                         "need a response column and at least one feature");
    if (width == 0) {
      width = fields.size();
    } else if (fields.size() != width) {
      detail::parse_fail(path, line_no,
                         "expected " + std::to_string(width) + " fields, got " +
                             std::to_string(fields.size()));
    }
    Vector row(fields.size() - 1);
    double v;
    if (!try_parse_double(fields[0], v))
      detail::parse_fail(path, line_no,
                         "bad number '" + std::string(fields[0]) + "'");
    response.push_back(v);
    for (std::size_t j = 1; j < fields.size(); ++j) {
      if (!try_parse_double(fields[j], v))
        detail::parse_fail(path, line_no,
                           "bad number '" + std::string(fields[j]) + "'");
      row[j - 1] = v;
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw config_error(path + ": dataset has no data rows");

  Dataset ds;
  ds.features = DenseMatrix(rows.size(), width - 1);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j + 1 < width; ++j) ds.features(i, j) = rows[i][j];
  ds.response = std::move(response);
  return ds;
}

// Sparse layout: "label idx:val idx:val ...", indices 1-based. The feature
// count comes from declared_dim when positive, otherwise from the largest
// index seen.
inline Dataset load_dataset_svmlight(const std::string& path,
                                     std::size_t declared_dim = 0) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open dataset file: " + path);

  struct Entry {
    std::size_t col;
    double val;
  };
  std::vector<std::vector<Entry>> sparse_rows;
  Vector response;
  std::size_t max_index = 0;
  std::size_t line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::blank(line)) continue;
    const auto tokens = detail::split_ws(line);
    double label;
    if (!try_parse_double(tokens[0], label))
      detail::parse_fail(path, line_no,
                         "bad label '" + std::string(tokens[0]) + "'");
    std::vector<Entry> entries;
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      const auto tok = tokens[t];
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos)
        detail::parse_fail(path, line_no,
                           "expected idx:val, got '" + std::string(tok) + "'");
      std::size_t idx;
      double val;
      if (!try_parse_size(tok.substr(0, colon), idx) || idx == 0)
        detail::parse_fail(path, line_no,
                           "bad feature index in '" + std::string(tok) + "'");
      if (!try_parse_double(tok.substr(colon + 1), val))
        detail::parse_fail(path, line_no,
                           "bad feature value in '" + std::string(tok) + "'");
      for (const auto& e : entries)
        if (e.col == idx - 1)
          detail::parse_fail(path, line_no,
                             "duplicate feature index " + std::to_string(idx));
      entries.push_back({idx - 1, val});
      max_index = std::max(max_index, idx);
    }
    response.push_back(label);
    sparse_rows.push_back(std::move(entries));
  }
  if (sparse_rows.empty())
    throw config_error(path + ": dataset has no data rows");
  if (declared_dim > 0 && max_index > declared_dim)
    throw config_error(path + ": feature index " + std::to_string(max_index) +
                       " exceeds declared dimension " +
                       std::to_string(declared_dim));

  const std::size_t dim = declared_dim > 0 ? declared_dim : max_index;
  if (dim == 0) throw config_error(path + ": no features present");
  Dataset ds;
  ds.features = DenseMatrix(sparse_rows.size(), dim);
  for (std::size_t i = 0; i < sparse_rows.size(); ++i)
    for (const auto& e : sparse_rows[i]) ds.features(i, e.col) = e.val;
  ds.response = std::move(response);
  return ds;
}

inline Dataset load_dataset(const std::string& path, DataFormat format,
                            std::size_t declared_dim = 0) {
  return format == DataFormat::csv ? load_dataset_csv(path)
                                   : load_dataset_svmlight(path, declared_dim);
}

inline void save_dataset_csv(const std::string& path, const DenseMatrix& a,
                             const Vector& b) {
  if (a.rows != b.size())
    throw usage_error("save: matrix rows must match response length");
  std::ofstream out(path);
  if (!out) throw io_error("cannot write dataset file: " + path);
  out << "b";
  for (std::size_t j = 0; j < a.cols; ++j) out << ",f" << (j + 1);
  out << "\n";
  for (std::size_t i = 0; i < a.rows; ++i) {
    out << format_double(b[i]);
    for (std::size_t j = 0; j < a.cols; ++j)
      out << "," << format_double(a(i, j));
    out << "\n";
  }
}

inline void save_dataset_svmlight(const std::string& path,
                                  const DenseMatrix& a, const Vector& b) {
  if (a.rows != b.size())
    throw usage_error("save: matrix rows must match response length");
  std::ofstream out(path);
  if (!out) throw io_error("cannot write dataset file: " + path);
  for (std::size_t i = 0; i < a.rows; ++i) {
    out << format_double(b[i]);
    for (std::size_t j = 0; j < a.cols; ++j)
      if (a(i, j) != 0.0)
        out << " " << (j + 1) << ":" << format_double(a(i, j));
    out << "\n";
  }
}

inline void save_dataset(const std::string& path, const DenseMatrix& a,
                         const Vector& b, DataFormat format) {
  if (format == DataFormat::csv)
    save_dataset_csv(path, a, b);
  else
    save_dataset_svmlight(path, a, b);
}

}  // namespace accmd
