#pragma once

#include "core/common.hpp"
#include "core/operators.hpp"
#include "core/prior.hpp"
#include "core/rng.hpp"

namespace dapspp {

// Inner product between the data-consistency gradient and the prior score at
// the noisy state x_t. The likelihood side follows the guidance convention:
// full gradient of -(1/gamma^2)||y - A(x0_hat)||^2 evaluated at the Tweedie
// estimate, with the denoiser's Jacobian treated as identity.
double inner_product_At(const ScoreModel& model, const ForwardOperator& op, const Vec& x_t,
                        const Vec& y, double gamma, double sigma_t);

struct KappaResult {
  double value = 0.0;
  bool prior_degenerate = false;  // prior score vanished; value is +inf
};

// Ratio of likelihood-gradient norm to prior-score norm at x_t.
KappaResult kappa(const ScoreModel& model, const ForwardOperator& op, const Vec& x_t,
                  const Vec& y, double gamma, double sigma_t);

struct KappaBound {
  double sigma_min_plus = 0.0;
  double gamma = 0.0;
  double lipschitz_c = 0.0;
  double sigma_t = 0.0;
  double residual_norm = 0.0;
};

// sigma_min_plus / (gamma^2 C) * sigma_t * ||r_t||.
double kappa_lower_bound(const KappaBound& kb);

// Empirical score Lipschitz constant at a fixed sigma, reported in the
// L <= C / sigma^2 normalization. Probes mix global pairs from the smoothed
// prior with local perturbation pairs.
double lipschitz_estimate(const ScoreModel& model, double sigma, int n_probes, Rng& rng);

// Exact mixture posterior for a linear operator with Gaussian noise.
class PosteriorOracle {
 public:
  explicit PosteriorOracle(GmmPrior posterior) : posterior_(std::move(posterior)) {}

  const GmmPrior& mixture() const { return posterior_; }
  Eigen::Index dim() const { return posterior_.dim(); }
  const std::vector<double>& weights() const { return posterior_.weights(); }
  const std::vector<Vec>& means() const { return posterior_.means(); }
  const std::vector<Mat>& covariances() const { return posterior_.covariances(); }

  Vec mean() const { return posterior_.mean(); }
  Mat cov() const { return posterior_.cov(); }
  double log_density(const Vec& x) const { return posterior_.log_density(x, 0.0); }
  Vec sample(Rng& rng) const { return posterior_.sample(rng); }
  Vec responsibilities(const Vec& x) const { return posterior_.responsibilities(x, 0.0); }

 private:
  GmmPrior posterior_;
};

PosteriorOracle gmm_posterior_oracle(const GmmPrior& prior, const ForwardOperator& op,
                                     const Vec& y, double gamma);

struct MomentError {
  double mean_err = 0.0;    // Euclidean distance of means
  double cov_err = 0.0;     // Frobenius distance of covariances
  double weight_err = 0.0;  // max abs deviation of soft-assigned weights
};

// Empirical moments of samples (one row per draw) against the oracle.
MomentError moment_error(const Mat& samples, const PosteriorOracle& oracle);

}  // namespace dapspp
