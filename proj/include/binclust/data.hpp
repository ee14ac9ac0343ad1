#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace binclust {

struct CsvError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MissingValueError : CsvError {
  using CsvError::CsvError;
};

/// Per-variable kind. Categorical values are stored as 0-based level indices.
struct VariableKind {
  enum class Type { Continuous, Categorical };
  Type type = Type::Continuous;
  int levels = 0;  // meaningful for Categorical only, always >= 2

  bool is_continuous() const { return type == Type::Continuous; }
  bool is_categorical() const { return type == Type::Categorical; }

  static VariableKind continuous() { return {Type::Continuous, 0}; }
  static VariableKind categorical(int levels) {
    if (levels < 2) throw std::invalid_argument("categorical kind needs >= 2 levels");
    return {Type::Categorical, levels};
  }

  bool operator==(const VariableKind&) const = default;
};

/// Column-major observation matrix with per-variable kind metadata.
/// Immutable by convention after construction; shared read-only by workers.
struct Dataset {
  std::vector<std::string> names;
  std::vector<VariableKind> kinds;
  std::vector<std::vector<double>> columns;

  int n() const { return columns.empty() ? 0 : static_cast<int>(columns[0].size()); }
  int cols() const { return static_cast<int>(columns.size()); }

  void validate() const {
    if (columns.empty() || columns[0].empty())
      throw std::invalid_argument("dataset must have n >= 1 and J >= 1");
    if (kinds.size() != columns.size() || names.size() != columns.size())
      throw std::invalid_argument("dataset metadata/column count mismatch");
    const std::size_t nrows = columns[0].size();
    for (std::size_t j = 0; j < columns.size(); ++j) {
      if (columns[j].size() != nrows)
        throw std::invalid_argument("dataset columns have unequal lengths");
      if (kinds[j].is_categorical()) {
        for (double v : columns[j]) {
          if (v < 0.0 || v >= kinds[j].levels || v != std::floor(v))
            throw std::invalid_argument("categorical entry outside [0, levels) in column " +
                                        names[j]);
        }
      }
    }
  }
};

/// Ground-truth component labels carried by simulators.
struct TruePartition {
  std::vector<int> labels;
  int k_true = 0;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline bool integer_like(double v) {
  return std::floor(v) == v && std::abs(v) < 9.007199254740992e15;
}

}  // namespace detail

/// Infer a column's kind from its values: non-negative integer-valued columns
/// with 2..10 distinct values become Categorical(max+1), everything else
/// Continuous. Deterministic, depends only on the multiset of values.
inline VariableKind infer_kind(const std::vector<double>& column) {
  std::set<double> distinct;
  double maxv = 0.0;
  for (double v : column) {
    if (!detail::integer_like(v) || v < 0.0) return VariableKind::continuous();
    distinct.insert(v);
    maxv = std::max(maxv, v);
    if (distinct.size() > 10) return VariableKind::continuous();
  }
  if (distinct.size() < 2) return VariableKind::continuous();
  return VariableKind::categorical(static_cast<int>(maxv) + 1);
}

/// Parse a kind override list like "c,c,k2,k4" (c = continuous, kN =
/// categorical with N levels).
inline std::vector<VariableKind> parse_kind_spec(const std::string& spec) {
  std::vector<VariableKind> kinds;
  for (const std::string& raw : detail::split_csv_line(spec)) {
    std::string tok = detail::trim(raw);
    if (tok == "c" || tok == "C") {
      kinds.push_back(VariableKind::continuous());
    } else if ((tok.size() > 1) && (tok[0] == 'k' || tok[0] == 'K')) {
      kinds.push_back(VariableKind::categorical(std::stoi(tok.substr(1))));
    } else {
      throw std::invalid_argument("bad kind token '" + tok + "' (expected c or kN)");
    }
  }
  return kinds;
}

/// Load a comma-separated file with a header row. Missing entries ("" or
/// "NA") are a hard error; there is no imputation path.
inline Dataset load_csv(const std::string& path,
                        const std::optional<std::vector<VariableKind>>& kind_spec = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw CsvError("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw CsvError("empty file '" + path + "'");
  Dataset ds;
  for (const std::string& h : detail::split_csv_line(line)) ds.names.push_back(detail::trim(h));
  const std::size_t ncols = ds.names.size();
  if (ncols == 0) throw CsvError("empty header in '" + path + "'");
  ds.columns.resize(ncols);

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    std::vector<std::string> fields = detail::split_csv_line(line);
    if (fields.size() != ncols)
      throw CsvError("ragged row at line " + std::to_string(lineno) + " in '" + path + "'");
    for (std::size_t j = 0; j < ncols; ++j) {
      std::string tok = detail::trim(fields[j]);
      if (tok.empty() || tok == "NA")
        throw MissingValueError("missing value at line " + std::to_string(lineno) + ", column " +
                                ds.names[j]);
      std::size_t pos = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &pos);
      } catch (const std::exception&) {
        throw CsvError("non-numeric token '" + tok + "' at line " + std::to_string(lineno) +
                       ", column " + ds.names[j]);
      }
      if (pos != tok.size())
        throw CsvError("non-numeric token '" + tok + "' at line " + std::to_string(lineno) +
                       ", column " + ds.names[j]);
      ds.columns[j].push_back(v);
    }
  }
  if (ds.columns[0].empty()) throw CsvError("no data rows in '" + path + "'");

  if (kind_spec) {
    if (kind_spec->size() != ncols)
      throw std::invalid_argument("kind override has " + std::to_string(kind_spec->size()) +
                                  " entries for " + std::to_string(ncols) + " columns");
    ds.kinds = *kind_spec;
  } else {
    for (const auto& col : ds.columns) ds.kinds.push_back(infer_kind(col));
  }
  ds.validate();
  return ds;
}

inline void save_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw CsvError("cannot write '" + path + "'");
  for (int j = 0; j < ds.cols(); ++j) out << (j ? "," : "") << ds.names[j];
  out << "\n";
  char buf[40];
  for (int i = 0; i < ds.n(); ++i) {
    for (int j = 0; j < ds.cols(); ++j) {
      if (j) out << ',';
      double v = ds.columns[j][i];
      if (ds.kinds[j].is_categorical()) {
        out << static_cast<long long>(v);
      } else {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << buf;
      }
    }
    out << "\n";
  }
}

inline void save_labels_csv(const std::vector<int>& labels, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw CsvError("cannot write '" + path + "'");
  out << "label\n";
  for (int v : labels) out << v << "\n";
}

inline std::vector<int> load_labels_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CsvError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw CsvError("empty file '" + path + "'");
  std::vector<int> labels;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    std::string tok = detail::trim(line);
    if (tok.empty()) continue;
    try {
      labels.push_back(std::stoi(tok));
    } catch (const std::exception&) {
      throw CsvError("non-integer label at line " + std::to_string(lineno) + " in '" + path + "'");
    }
  }
  if (labels.empty()) throw CsvError("no labels in '" + path + "'");
  return labels;
}

/// Sample standard deviation (divisor n-1) of a continuous column.
inline double column_sd(const Dataset& ds, int j) {
  if (j < 0 || j >= ds.cols()) throw std::invalid_argument("column index out of range");
  if (!ds.kinds[j].is_continuous())
    throw std::invalid_argument("column_sd requires a continuous column");
  const auto& col = ds.columns[j];
  const int n = static_cast<int>(col.size());
  if (n < 2) throw std::invalid_argument("column_sd requires n >= 2");
  double mean = 0.0;
  for (double v : col) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : col) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (n - 1));
}

}  // namespace binclust
