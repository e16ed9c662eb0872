#include "gradhom/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "gradhom/errors.hpp"

namespace gradhom {

ErrorMetric error_metrics(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ValidationError("error_metrics: operands differ in size");
  double na = 0.0, nd = 0.0, md = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    na += a[i] * a[i];
    nd += d * d;
    md = std::max(md, std::abs(d));
  }
  na = std::sqrt(na);
  nd = std::sqrt(nd);
  ErrorMetric m;
  if (na > 0.0) {
    m.e_max = md / na;
    m.e_norm = nd / na;
  } else {
    m.e_max = md;
    m.e_norm = nd;
    m.absolute = true;
  }
  return m;
}

bool ErrorReport::all_pass() const {
  for (const auto& r : rows)
    if (!r.pass()) return false;
  return true;
}

std::string format_double(double v) {
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

std::string cell(double v) { return format_double(v); }
std::string cell(int v) { return std::to_string(v); }
std::string cell(bool v) { return v ? "true" : "false"; }

CsvTable& CsvTable::row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) throw ValidationError("csv: row width does not match the header");
  rows_.push_back(std::move(cells));
  return *this;
}

void CsvTable::write(std::ostream& os) const {
  auto line = [&os](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
}

void CsvTable::write(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ValidationError("output: cannot write " + path);
  write(out);
  if (!out) throw ValidationError("output: write failed for " + path);
}

}  // namespace gradhom
