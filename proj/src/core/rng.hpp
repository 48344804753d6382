#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace dapspp {

std::uint64_t mix_seed(std::uint64_t seed, std::string_view tag, std::uint64_t index);

// Deterministic RNG with named substreams derived from one master seed.
// Gaussian draws use Box-Muller on the raw mt19937_64 stream, so identical
// seeds reproduce identical variates independent of the standard library's
// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  static Rng derive(std::uint64_t master, std::string_view tag, std::uint64_t index = 0) {
    return Rng(mix_seed(master, tag, index));
  }

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double normal();
  Eigen::VectorXd normal_vec(Eigen::Index n);

  // Index draw proportional to nonnegative weights.
  std::size_t pick(const std::vector<double>& weights);

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace dapspp
