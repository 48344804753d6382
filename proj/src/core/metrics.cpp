#include "core/metrics.hpp"

#include <cmath>
#include <limits>

namespace dapspp {

double mse(const Vec& x, const Vec& x_ref) {
  require(x.size() == x_ref.size() && x.size() > 0, "mse: shape mismatch");
  return (x - x_ref).squaredNorm() / static_cast<double>(x.size());
}

double psnr(const Vec& x, const Vec& x_ref, double peak) {
  require(peak > 0.0, "psnr: peak must be positive");
  double e = mse(x, x_ref);
  if (e == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / e);
}

double ssim(const Vec& x, const Vec& x_ref, Eigen::Index rows, Eigen::Index cols, double peak) {
  require(rows > 0 && cols > 0 && rows * cols == x.size(), "ssim: grid shape mismatch");
  require(x.size() == x_ref.size(), "ssim: shape mismatch");
  require(peak > 0.0, "ssim: peak must be positive");

  const Eigen::Index side = std::min<Eigen::Index>(7, std::min(rows, cols));
  const double win_std = 1.5;
  Mat w(side, side);
  const double c = (static_cast<double>(side) - 1.0) / 2.0;
  for (Eigen::Index i = 0; i < side; ++i)
    for (Eigen::Index j = 0; j < side; ++j) {
      double di = static_cast<double>(i) - c, dj = static_cast<double>(j) - c;
      w(i, j) = std::exp(-(di * di + dj * dj) / (2.0 * win_std * win_std));
    }
  w /= w.sum();

  const double c1 = (0.01 * peak) * (0.01 * peak);
  const double c2 = (0.03 * peak) * (0.03 * peak);

  auto at = [cols](const Vec& v, Eigen::Index i, Eigen::Index j) { return v[i * cols + j]; };

  double total = 0.0;
  Eigen::Index count = 0;
  for (Eigen::Index i = 0; i + side <= rows; ++i) {
    for (Eigen::Index j = 0; j + side <= cols; ++j) {
      double mu_a = 0.0, mu_b = 0.0;
      for (Eigen::Index a = 0; a < side; ++a)
        for (Eigen::Index b = 0; b < side; ++b) {
          mu_a += w(a, b) * at(x, i + a, j + b);
          mu_b += w(a, b) * at(x_ref, i + a, j + b);
        }
      double var_a = 0.0, var_b = 0.0, cov_ab = 0.0;
      for (Eigen::Index a = 0; a < side; ++a)
        for (Eigen::Index b = 0; b < side; ++b) {
          double da = at(x, i + a, j + b) - mu_a;
          double db = at(x_ref, i + a, j + b) - mu_b;
          var_a += w(a, b) * da * da;
          var_b += w(a, b) * db * db;
          cov_ab += w(a, b) * da * db;
        }
      double num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov_ab + c2);
      double den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
      total += num / den;
      ++count;
    }
  }
  require(count > 0, "ssim: window larger than image");
  return total / static_cast<double>(count);
}

}  // namespace dapspp
