#include "core/prior.hpp"

#include <cmath>
#include <numbers>

namespace dapspp {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // log(2*pi)

double log_sum_exp(const Vec& v) {
  double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += std::exp(v[i] - m);
  return m + std::log(s);
}

}  // namespace

double ScoreModel::log_density(const Vec&, double) const {
  throw std::invalid_argument("log_density: not available for this model");
}

Vec tweedie_denoise(const ScoreModel& model, const Vec& x_t, double sigma) {
  require(sigma >= 0.0, "tweedie_denoise: sigma must be nonnegative");
  require(x_t.size() == model.dim(), "tweedie_denoise: dimension mismatch");
  if (sigma == 0.0) return x_t;
  return x_t + sigma * sigma * model.score(x_t, sigma);
}

IsotropicGaussianPrior::IsotropicGaussianPrior(Vec mu, double tau2)
    : mu_(std::move(mu)), tau2_(tau2) {
  require(mu_.size() > 0, "isotropic prior: empty mean");
  require(tau2_ > 0.0, "isotropic prior: tau2 must be positive");
}

Vec IsotropicGaussianPrior::score(const Vec& x, double sigma) const {
  require(sigma > 0.0, "score: sigma must be positive");
  require(x.size() == dim(), "score: dimension mismatch");
  return -(x - mu_) / (tau2_ + sigma * sigma);
}

double IsotropicGaussianPrior::log_density(const Vec& x, double sigma) const {
  require(sigma >= 0.0, "log_density: sigma must be nonnegative");
  require(x.size() == dim(), "log_density: dimension mismatch");
  const double v = tau2_ + sigma * sigma;
  const double d = static_cast<double>(dim());
  return -0.5 * d * (kLog2Pi + std::log(v)) - 0.5 * (x - mu_).squaredNorm() / v;
}

Vec IsotropicGaussianPrior::sample(Rng& rng) const {
  return mu_ + std::sqrt(tau2_) * rng.normal_vec(dim());
}

GmmPrior::GmmPrior(std::vector<double> weights, std::vector<Vec> means, std::vector<Mat> covariances)
    : weights_(std::move(weights)), means_(std::move(means)), covs_(std::move(covariances)) {
  require(!weights_.empty(), "gmm prior: no components");
  require(weights_.size() == means_.size() && weights_.size() == covs_.size(),
          "gmm prior: component count mismatch");
  dim_ = means_.front().size();
  require(dim_ > 0, "gmm prior: empty mean");
  double total = 0.0;
  for (double w : weights_) {
    require(w > 0.0, "gmm prior: weights must be positive");
    total += w;
  }
  for (double& w : weights_) w /= total;
  for (std::size_t k = 0; k < means_.size(); ++k) {
    require(means_[k].size() == dim_, "gmm prior: mean dimension mismatch");
    const Mat& c = covs_[k];
    require(c.rows() == dim_ && c.cols() == dim_, "gmm prior: covariance shape mismatch");
    require((c - c.transpose()).cwiseAbs().maxCoeff() <= 1e-9 * (1.0 + c.cwiseAbs().maxCoeff()),
            "gmm prior: covariance must be symmetric");
  }
  // SPD check up front: the sigma = 0 factorization must exist.
  cache_for(0.0);
}

GmmPrior::GmmPrior(const GmmPrior& other)
    : dim_(other.dim_), weights_(other.weights_), means_(other.means_), covs_(other.covs_) {
  std::lock_guard<std::mutex> lock(other.cache_mutex_);
  cache_ = other.cache_;
}

GmmPrior& GmmPrior::operator=(const GmmPrior& other) {
  if (this == &other) return *this;
  std::scoped_lock lock(cache_mutex_, other.cache_mutex_);
  dim_ = other.dim_;
  weights_ = other.weights_;
  means_ = other.means_;
  covs_ = other.covs_;
  cache_ = other.cache_;
  return *this;
}

GmmPrior GmmPrior::single(Vec mu, Mat cov) {
  std::vector<double> w{1.0};
  std::vector<Vec> m{std::move(mu)};
  std::vector<Mat> c{std::move(cov)};
  return GmmPrior(std::move(w), std::move(m), std::move(c));
}

const GmmPrior::SigmaCache& GmmPrior::cache_for(double sigma) const {
  std::lock_guard<std::mutex> lock(cache_mutex_);
  auto it = cache_.find(sigma);
  if (it != cache_.end()) return *it->second;
  auto entry = std::make_shared<SigmaCache>();
  entry->llt.reserve(covs_.size());
  entry->log_norm.reserve(covs_.size());
  const double d = static_cast<double>(dim_);
  for (const Mat& c : covs_) {
    Mat smoothed = c + sigma * sigma * Mat::Identity(dim_, dim_);
    Eigen::LLT<Mat> llt(smoothed);
    require(llt.info() == Eigen::Success, "gmm prior: covariance not positive definite");
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < dim_; ++i) log_det += std::log(llt.matrixL()(i, i));
    log_det *= 2.0;
    entry->log_norm.push_back(-0.5 * d * kLog2Pi - 0.5 * log_det);
    entry->llt.push_back(std::move(llt));
  }
  cache_.emplace(sigma, entry);
  return *entry;
}

Vec GmmPrior::component_log_densities(const Vec& x, double sigma) const {
  const SigmaCache& cache = cache_for(sigma);
  Vec out(static_cast<Eigen::Index>(weights_.size()));
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    Vec diff = x - means_[k];
    Vec half = cache.llt[k].matrixL().solve(diff);
    out[static_cast<Eigen::Index>(k)] = cache.log_norm[k] - 0.5 * half.squaredNorm();
  }
  return out;
}

Vec GmmPrior::responsibilities(const Vec& x, double sigma) const {
  require(sigma >= 0.0, "responsibilities: sigma must be nonnegative");
  require(x.size() == dim_, "responsibilities: dimension mismatch");
  Vec lp = component_log_densities(x, sigma);
  for (std::size_t k = 0; k < weights_.size(); ++k)
    lp[static_cast<Eigen::Index>(k)] += std::log(weights_[k]);
  const double lse = log_sum_exp(lp);
  Vec r(lp.size());
  for (Eigen::Index k = 0; k < lp.size(); ++k) r[k] = std::exp(lp[k] - lse);
  return r;
}

Vec GmmPrior::score(const Vec& x, double sigma) const {
  require(sigma > 0.0, "score: sigma must be positive");
  require(x.size() == dim_, "score: dimension mismatch");
  const SigmaCache& cache = cache_for(sigma);
  Vec r = responsibilities(x, sigma);
  Vec s = Vec::Zero(dim_);
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    Vec g = cache.llt[k].solve(x - means_[k]);
    s -= r[static_cast<Eigen::Index>(k)] * g;
  }
  return s;
}

double GmmPrior::log_density(const Vec& x, double sigma) const {
  require(sigma >= 0.0, "log_density: sigma must be nonnegative");
  require(x.size() == dim_, "log_density: dimension mismatch");
  Vec lp = component_log_densities(x, sigma);
  for (std::size_t k = 0; k < weights_.size(); ++k)
    lp[static_cast<Eigen::Index>(k)] += std::log(weights_[k]);
  return log_sum_exp(lp);
}

Vec GmmPrior::sample(Rng& rng) const {
  std::size_t k = rng.pick(weights_);
  const SigmaCache& cache = cache_for(0.0);
  Vec z = rng.normal_vec(dim_);
  return means_[k] + Mat(cache.llt[k].matrixL()) * z;
}

Vec GmmPrior::mean() const {
  Vec m = Vec::Zero(dim_);
  for (std::size_t k = 0; k < weights_.size(); ++k) m += weights_[k] * means_[k];
  return m;
}

Mat GmmPrior::cov() const {
  Vec m = mean();
  Mat c = Mat::Zero(dim_, dim_);
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    Vec d = means_[k] - m;
    c += weights_[k] * (covs_[k] + d * d.transpose());
  }
  return c;
}

}  // namespace dapspp
