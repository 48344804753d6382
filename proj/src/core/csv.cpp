#include "core/csv.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace dapspp {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : os_(path, std::ios::binary), columns_(header.size()) {
  if (!os_) throw std::runtime_error("csv: cannot open '" + path + "' for writing");
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) os_ << ',';
    os_ << header[i];
  }
  os_ << '\n';
}

void CsvWriter::separator() {
  if (current_ >= columns_) throw std::runtime_error("csv: too many fields in row");
  if (current_) os_ << ',';
  ++current_;
}

CsvWriter& CsvWriter::field(const std::string& s) {
  separator();
  os_ << s;
  return *this;
}

CsvWriter& CsvWriter::field(double v) { return field(format_double(v)); }

CsvWriter& CsvWriter::field(long v) {
  separator();
  os_ << v;
  return *this;
}

CsvWriter& CsvWriter::empty_field() {
  separator();
  return *this;
}

void CsvWriter::end_row() {
  if (current_ != columns_) throw std::runtime_error("csv: row is missing fields");
  os_ << '\n';
  current_ = 0;
}

}  // namespace dapspp
