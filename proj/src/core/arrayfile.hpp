#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/common.hpp"

namespace dapspp {

// Minimal binary tensor container:
//   magic "DPX1" | dtype u8 (0 = f64) | rank u8 | shape rank x u32 LE |
//   payload row-major f64 LE.
struct ArrayData {
  std::vector<std::uint32_t> shape;
  std::vector<double> values;

  std::size_t element_count() const {
    std::size_t n = 1;
    for (std::uint32_t s : shape) n *= s;
    return n;
  }
};

void write_dpx(const std::string& path, const ArrayData& data);
ArrayData read_dpx(const std::string& path);

void write_dpx_vector(const std::string& path, const Vec& v);
Vec read_dpx_vector(const std::string& path);

}  // namespace dapspp
