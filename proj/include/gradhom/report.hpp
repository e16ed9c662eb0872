#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "gradhom/tensor.hpp"

namespace gradhom {

/// E_max = max|a - b| / |a|, E_norm = |a - b| / |a| (Frobenius).  When |a| = 0
/// both are reported as absolute values and flagged.
struct ErrorMetric {
  double e_max = 0.0;
  double e_norm = 0.0;
  bool absolute = false;
};

ErrorMetric error_metrics(std::span<const double> a, std::span<const double> b);

template <int R>
ErrorMetric error_metrics(const Tensor<R>& a, const Tensor<R>& b) {
  return error_metrics(std::span<const double>(a.data), std::span<const double>(b.data));
}

struct ErrorRow {
  std::string quantity;
  ErrorMetric metric;
  double threshold = 0.0;  // applied to E_max
  bool pass() const { return metric.e_max <= threshold; }
};

struct ErrorReport {
  std::vector<ErrorRow> rows;
  bool all_pass() const;
};

/// Shortest text that reads back to the same double (at most 17 significant digits).
std::string format_double(double v);

/// Comma-separated table with a fixed header.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
  CsvTable& row(std::vector<std::string> cells);
  void write(std::ostream& os) const;
  /// Throws ValidationError when the file cannot be written.
  void write(const std::string& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string cell(double v);
std::string cell(int v);
std::string cell(bool v);
inline std::string cell(const std::string& v) { return v; }
inline std::string cell(const char* v) { return v; }

}  // namespace gradhom
