#include "core/arrayfile.hpp"

#include <cstring>
#include <fstream>

namespace dapspp {

namespace {

constexpr char kMagic[4] = {'D', 'P', 'X', '1'};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void put_u32_le(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32_le(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f64_le(std::ostream& os, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64_le(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

void write_dpx(const std::string& path, const ArrayData& data) {
  require(!data.shape.empty() && data.shape.size() <= 255, "dpx: rank must be 1..255");
  require(data.values.size() == data.element_count(), "dpx: payload size mismatch");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("dpx: cannot open '" + path + "' for writing");
  os.write(kMagic, 4);
  os.put(static_cast<char>(0));  // dtype f64
  os.put(static_cast<char>(data.shape.size()));
  for (std::uint32_t s : data.shape) put_u32_le(os, s);
  for (double v : data.values) put_f64_le(os, v);
  if (!os) throw IoError("dpx: write failed for '" + path + "'");
}

ArrayData read_dpx(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("dpx: cannot open '" + path + "'");
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw IoError("dpx: bad magic in '" + path + "'");
  int dtype = is.get();
  if (dtype != 0) throw IoError("dpx: unsupported dtype tag in '" + path + "'");
  int rank = is.get();
  if (rank <= 0) throw IoError("dpx: bad rank in '" + path + "'");
  ArrayData data;
  data.shape.resize(static_cast<std::size_t>(rank));
  for (int i = 0; i < rank; ++i) data.shape[static_cast<std::size_t>(i)] = get_u32_le(is);
  data.values.resize(data.element_count());
  for (double& v : data.values) v = get_f64_le(is);
  if (!is) throw IoError("dpx: truncated payload in '" + path + "'");
  return data;
}

void write_dpx_vector(const std::string& path, const Vec& v) {
  ArrayData data;
  data.shape = {static_cast<std::uint32_t>(v.size())};
  data.values.assign(v.data(), v.data() + v.size());
  write_dpx(path, data);
}

Vec read_dpx_vector(const std::string& path) {
  ArrayData data = read_dpx(path);
  Vec v(static_cast<Eigen::Index>(data.values.size()));
  for (std::size_t i = 0; i < data.values.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = data.values[i];
  return v;
}

}  // namespace dapspp
