#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace dapspp {

// CSV with '.' decimals, '\n' line endings and a mandatory header row.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);

  CsvWriter& field(const std::string& s);
  CsvWriter& field(double v);
  CsvWriter& field(long v);
  CsvWriter& field(int v) { return field(static_cast<long>(v)); }
  CsvWriter& empty_field();
  void end_row();

 private:
  void separator();
  std::ofstream os_;
  std::size_t columns_;
  std::size_t current_ = 0;
};

std::string format_double(double v);

}  // namespace dapspp
