#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace dapspp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Raised when a run config fails validation; maps to exit/status code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when sampler state goes non-finite; maps to exit/status code 3.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace dapspp
