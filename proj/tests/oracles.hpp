#pragma once

// Test-only numerical references, independent of the library's analytic
// implementation paths: Gauss-Hermite quadrature for posterior means,
// finite-difference gradients, a 1-D grid Bayes update and the closed-form
// Gaussian probability flow.

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "core/common.hpp"
#include "core/prior.hpp"

namespace oracles {

using dapspp::Mat;
using dapspp::Vec;

// Nodes/weights so that E_{z~N(0,1)}[f(z)] ~= sum_i w_i f(z_i)
// (Golub-Welsch on the Hermite Jacobi matrix).
inline std::pair<std::vector<double>, std::vector<double>> gauss_hermite_normal(int n) {
  Mat jacobi = Mat::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    double b = std::sqrt(static_cast<double>(i) / 2.0);
    jacobi(i, i - 1) = b;
    jacobi(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(jacobi);
  std::vector<double> nodes(static_cast<std::size_t>(n));
  std::vector<double> weights(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    nodes[static_cast<std::size_t>(i)] = std::sqrt(2.0) * es.eigenvalues()[i];
    double v0 = es.eigenvectors()(0, i);
    weights[static_cast<std::size_t>(i)] = v0 * v0;  // mu0 = sqrt(pi) cancels
  }
  return {nodes, weights};
}

// E[x0 | x_t] for a GMM prior under N(x_t; x0, sigma^2 I) corruption, by
// direct quadrature. Small sigma integrates against the noise kernel, large
// sigma against the prior components; both are spectrally accurate in their
// regime and overlap in the middle band.
inline Vec gmm_posterior_mean_quadrature(const dapspp::GmmPrior& prior, const Vec& x_t,
                                         double sigma, int n_nodes = 96) {
  const Eigen::Index d = prior.dim();
  auto [nodes, weights] = gauss_hermite_normal(n_nodes);

  double min_scale = std::numeric_limits<double>::infinity();
  for (const Mat& c : prior.covariances()) {
    Eigen::SelfAdjointEigenSolver<Mat> es(c);
    min_scale = std::min(min_scale, std::sqrt(es.eigenvalues().minCoeff()));
  }

  Vec numer = Vec::Zero(d);
  double denom = 0.0;
  const double log2pi = std::log(2.0 * std::numbers::pi);

  auto tensor_loop = [&](const std::function<void(const Vec&, double)>& visit) {
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    Vec z(d);
    for (;;) {
      double w = 1.0;
      for (Eigen::Index k = 0; k < d; ++k) {
        z[k] = nodes[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])];
        w *= weights[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])];
      }
      visit(z, w);
      Eigen::Index k = 0;
      for (; k < d; ++k) {
        if (++idx[static_cast<std::size_t>(k)] < n_nodes) break;
        idx[static_cast<std::size_t>(k)] = 0;
      }
      if (k == d) break;
    }
  };

  if (sigma <= min_scale) {
    // x0 = x_t + sigma z against the noise kernel; weight by the clean prior.
    tensor_loop([&](const Vec& z, double w) {
      Vec x0 = x_t + sigma * z;
      double p = std::exp(prior.log_density(x0, 0.0));
      numer += w * p * x0;
      denom += w * p;
    });
  } else {
    // Component-wise: x0 = mu_k + L_k z against each prior Gaussian,
    // weighted by the noise kernel.
    for (std::size_t k = 0; k < prior.n_components(); ++k) {
      Eigen::LLT<Mat> llt(prior.covariances()[k]);
      Mat l = llt.matrixL();
      double wk = prior.weights()[k];
      tensor_loop([&](const Vec& z, double w) {
        Vec x0 = prior.means()[k] + l * z;
        double log_kernel = -0.5 * static_cast<double>(d) * (log2pi + 2.0 * std::log(sigma)) -
                            0.5 * (x_t - x0).squaredNorm() / (sigma * sigma);
        double p = wk * std::exp(log_kernel);
        numer += w * p * x0;
        denom += w * p;
      });
    }
  }
  return numer / denom;
}

// Central finite-difference gradient of a scalar field.
inline Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x,
                       double h = 1e-6) {
  Vec g(x.size());
  Vec xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double step = h * std::max(1.0, std::abs(x[i]));
    xp[i] = x[i] + step;
    double up = f(xp);
    xp[i] = x[i] - step;
    double down = f(xp);
    xp[i] = x[i];
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

// Directional derivative of a vector field by central differences.
inline Vec fd_jvp(const std::function<Vec(const Vec&)>& f, const Vec& x, const Vec& dir,
                  double h = 1e-6) {
  return (f(x + h * dir) - f(x - h * dir)) / (2.0 * h);
}

// 1-D posterior density p(x0|y) on a grid via direct Bayes: prior density
// times N(y; a x0, gamma^2) normalized by trapezoid quadrature.
struct Grid1d {
  std::vector<double> xs;
  std::vector<double> density;
};

inline Grid1d grid_bayes_1d(const std::function<double(double)>& prior_density, double a,
                            double y, double gamma, double lo, double hi, int n) {
  Grid1d g;
  g.xs.resize(static_cast<std::size_t>(n));
  g.density.resize(static_cast<std::size_t>(n));
  double h = (hi - lo) / (n - 1);
  for (int i = 0; i < n; ++i) {
    double x = lo + h * i;
    double lik = std::exp(-0.5 * (y - a * x) * (y - a * x) / (gamma * gamma));
    g.xs[static_cast<std::size_t>(i)] = x;
    g.density[static_cast<std::size_t>(i)] = prior_density(x) * lik;
  }
  double z = 0.0;
  for (int i = 0; i + 1 < n; ++i)
    z += 0.5 * h * (g.density[static_cast<std::size_t>(i)] +
                    g.density[static_cast<std::size_t>(i + 1)]);
  for (double& v : g.density) v /= z;
  return g;
}

// Exact probability-flow solution for an isotropic Gaussian prior:
// x(sigma_b) = mu + (x_a - mu) * sqrt((tau2 + sigma_b^2) / (tau2 + sigma_a^2)).
inline Vec gaussian_flow_exact(const Vec& mu, double tau2, const Vec& x_a, double sigma_a,
                               double sigma_b) {
  double scale = std::sqrt((tau2 + sigma_b * sigma_b) / (tau2 + sigma_a * sigma_a));
  return mu + scale * (x_a - mu);
}

// Least-squares slope of log(err) against log(h).
inline double fitted_slope(const std::vector<double>& hs, const std::vector<double>& errs) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(hs.size());
  for (std::size_t i = 0; i < hs.size(); ++i) {
    double lx = std::log(hs[i]), ly = std::log(errs[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace oracles
