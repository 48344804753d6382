#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include <Eigen/Cholesky>

#include "core/common.hpp"
#include "core/rng.hpp"

namespace dapspp {

// Score model over a family of Gaussian-smoothed densities p_sigma. The
// analytic implementations below stand in for a trained network; anything
// matching this interface can be plugged into the samplers.
class ScoreModel {
 public:
  virtual ~ScoreModel() = default;

  virtual Eigen::Index dim() const = 0;

  // Gradient of log p_sigma at x; requires sigma > 0.
  virtual Vec score(const Vec& x, double sigma) const = 0;

  virtual bool has_log_density() const { return false; }

  // Log of the sigma-smoothed density; sigma = 0 means the clean density.
  virtual double log_density(const Vec& x, double sigma) const;

  // Exact draw from the clean prior.
  virtual Vec sample(Rng& rng) const = 0;
};

// Posterior-mean denoiser x_t + sigma^2 * score(x_t, sigma); identity at sigma = 0.
Vec tweedie_denoise(const ScoreModel& model, const Vec& x_t, double sigma);

class IsotropicGaussianPrior final : public ScoreModel {
 public:
  IsotropicGaussianPrior(Vec mu, double tau2);

  Eigen::Index dim() const override { return mu_.size(); }
  Vec score(const Vec& x, double sigma) const override;
  bool has_log_density() const override { return true; }
  double log_density(const Vec& x, double sigma) const override;
  Vec sample(Rng& rng) const override;

  const Vec& mu() const { return mu_; }
  double tau2() const { return tau2_; }

 private:
  Vec mu_;
  double tau2_;
};

// Gaussian mixture prior with closed-form smoothed density
// p_sigma(x) = sum_k w_k N(x; mu_k, Sigma_k + sigma^2 I).
class GmmPrior final : public ScoreModel {
 public:
  GmmPrior(std::vector<double> weights, std::vector<Vec> means, std::vector<Mat> covariances);

  // Copies share no state; the factorization cache is rebuilt lazily.
  GmmPrior(const GmmPrior& other);
  GmmPrior& operator=(const GmmPrior& other);

  static GmmPrior single(Vec mu, Mat cov);

  Eigen::Index dim() const override { return dim_; }
  Vec score(const Vec& x, double sigma) const override;
  bool has_log_density() const override { return true; }
  double log_density(const Vec& x, double sigma) const override;
  Vec sample(Rng& rng) const override;

  // Posterior component probabilities at noise level sigma (log-sum-exp stable).
  Vec responsibilities(const Vec& x, double sigma) const;

  std::size_t n_components() const { return weights_.size(); }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<Vec>& means() const { return means_; }
  const std::vector<Mat>& covariances() const { return covs_; }

  // Mixture moments of the clean prior.
  Vec mean() const;
  Mat cov() const;

 private:
  struct SigmaCache {
    std::vector<Eigen::LLT<Mat>> llt;     // factors of Sigma_k + sigma^2 I
    std::vector<double> log_norm;         // -d/2 log(2 pi) - 1/2 log det
  };
  const SigmaCache& cache_for(double sigma) const;
  Vec component_log_densities(const Vec& x, double sigma) const;

  Eigen::Index dim_ = 0;
  std::vector<double> weights_;
  std::vector<Vec> means_;
  std::vector<Mat> covs_;

  // Schedules revisit a fixed set of sigmas; factorizations are cached per
  // exact sigma value behind a mutex so const calls stay thread-safe.
  mutable std::mutex cache_mutex_;
  mutable std::map<double, std::shared_ptr<const SigmaCache>> cache_;
};

}  // namespace dapspp
