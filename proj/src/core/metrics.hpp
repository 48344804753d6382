#pragma once

#include "core/common.hpp"

namespace dapspp {

double mse(const Vec& x, const Vec& x_ref);

// 10*log10(peak^2 / mse); +inf when the inputs coincide.
double psnr(const Vec& x, const Vec& x_ref, double peak = 1.0);

// Mean structural similarity over a rows x cols grid with a Gaussian window
// of side min(7, shortest grid side) and the usual k1 = 0.01, k2 = 0.03.
double ssim(const Vec& x, const Vec& x_ref, Eigen::Index rows, Eigen::Index cols,
            double peak = 1.0);

}  // namespace dapspp
