#include "core/diagnostics.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

namespace dapspp {

namespace {

Vec guidance_gradient(const ScoreModel& model, const ForwardOperator& op, const Vec& x_t,
                      const Vec& y, double gamma, double sigma_t) {
  Vec x0_hat = tweedie_denoise(model, x_t, sigma_t);
  return likelihood_grad(op, x0_hat, y, gamma, GradConvention::PaperLiteral);
}

}  // namespace

double inner_product_At(const ScoreModel& model, const ForwardOperator& op, const Vec& x_t,
                        const Vec& y, double gamma, double sigma_t) {
  require(sigma_t > 0.0, "inner_product_At: sigma_t must be positive");
  Vec g_lik = guidance_gradient(model, op, x_t, y, gamma, sigma_t);
  Vec g_prior = model.score(x_t, sigma_t);
  return g_lik.dot(g_prior);
}

KappaResult kappa(const ScoreModel& model, const ForwardOperator& op, const Vec& x_t,
                  const Vec& y, double gamma, double sigma_t) {
  require(sigma_t > 0.0, "kappa: sigma_t must be positive");
  double lik_norm = guidance_gradient(model, op, x_t, y, gamma, sigma_t).norm();
  double prior_norm = model.score(x_t, sigma_t).norm();
  if (prior_norm == 0.0) {
    return {std::numeric_limits<double>::infinity(), true};
  }
  return {lik_norm / prior_norm, false};
}

double kappa_lower_bound(const KappaBound& kb) {
  require(kb.sigma_min_plus > 0.0, "kappa_lower_bound: sigma_min_plus must be positive");
  require(kb.gamma > 0.0, "kappa_lower_bound: gamma must be positive");
  require(kb.lipschitz_c > 0.0, "kappa_lower_bound: lipschitz_c must be positive");
  require(kb.sigma_t > 0.0, "kappa_lower_bound: sigma_t must be positive");
  require(kb.residual_norm > 0.0, "kappa_lower_bound: residual_norm must be positive");
  return kb.sigma_min_plus / (kb.gamma * kb.gamma * kb.lipschitz_c) * kb.sigma_t *
         kb.residual_norm;
}

double lipschitz_estimate(const ScoreModel& model, double sigma, int n_probes, Rng& rng) {
  require(sigma > 0.0, "lipschitz_estimate: sigma must be positive");
  require(n_probes >= 1, "lipschitz_estimate: need at least one probe");
  double max_ratio = 0.0;
  for (int p = 0; p < n_probes; ++p) {
    Vec x = model.sample(rng) + sigma * rng.normal_vec(model.dim());
    Vec x2;
    if (p % 2 == 0) {
      x2 = model.sample(rng) + sigma * rng.normal_vec(model.dim());
    } else {
      Vec dir = rng.normal_vec(model.dim());
      x2 = x + 1e-3 * (1.0 + sigma) * dir / dir.norm();
    }
    double dist = (x - x2).norm();
    if (dist == 0.0) continue;
    double ratio = (model.score(x, sigma) - model.score(x2, sigma)).norm() / dist;
    max_ratio = std::max(max_ratio, ratio);
  }
  return max_ratio * sigma * sigma;
}

PosteriorOracle gmm_posterior_oracle(const GmmPrior& prior, const ForwardOperator& op,
                                     const Vec& y, double gamma) {
  require(op.linear(), "gmm_posterior_oracle: operator must be linear");
  require(gamma > 0.0, "gmm_posterior_oracle: gamma must be positive");
  require(y.size() == op.output_dim(), "gmm_posterior_oracle: observation shape mismatch");
  require(prior.dim() == op.input_dim(), "gmm_posterior_oracle: prior/operator mismatch");

  const Mat a = densify(op);
  const Mat ata = a.transpose() * a;
  const Vec aty = a.transpose() * y;
  const double inv_g2 = 1.0 / (gamma * gamma);
  const Eigen::Index d = prior.dim();
  const Eigen::Index m = y.size();
  constexpr double kLog2Pi = 1.8378770664093454836;

  std::vector<double> log_w;
  std::vector<Vec> means;
  std::vector<Mat> covs;
  for (std::size_t k = 0; k < prior.n_components(); ++k) {
    const Vec& mu = prior.means()[k];
    const Mat& cov = prior.covariances()[k];
    Eigen::LLT<Mat> prior_llt(cov);
    require(prior_llt.info() == Eigen::Success, "gmm_posterior_oracle: prior covariance not SPD");

    // Conjugate update per component.
    Mat precision = prior_llt.solve(Mat::Identity(d, d)) + inv_g2 * ata;
    Eigen::LLT<Mat> post_llt(precision);
    require(post_llt.info() == Eigen::Success, "gmm_posterior_oracle: posterior precision not SPD");
    Mat post_cov = post_llt.solve(Mat::Identity(d, d));
    Vec post_mean = post_llt.solve(prior_llt.solve(mu) + inv_g2 * aty);

    // Component marginal likelihood N(y; A mu, A Sigma A^T + gamma^2 I).
    Mat s = a * cov * a.transpose() + gamma * gamma * Mat::Identity(m, m);
    Eigen::LLT<Mat> s_llt(s);
    require(s_llt.info() == Eigen::Success, "gmm_posterior_oracle: marginal covariance not SPD");
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) log_det += std::log(s_llt.matrixL()(i, i));
    log_det *= 2.0;
    Vec diff = y - a * mu;
    Vec half = s_llt.matrixL().solve(diff);
    double log_marginal = -0.5 * (static_cast<double>(m) * kLog2Pi + log_det) -
                          0.5 * half.squaredNorm();

    log_w.push_back(std::log(prior.weights()[k]) + log_marginal);
    means.push_back(std::move(post_mean));
    covs.push_back(0.5 * (post_cov + post_cov.transpose()));
  }

  double max_lw = *std::max_element(log_w.begin(), log_w.end());
  std::vector<double> weights;
  weights.reserve(log_w.size());
  for (double lw : log_w) weights.push_back(std::exp(lw - max_lw));
  return PosteriorOracle(GmmPrior(std::move(weights), std::move(means), std::move(covs)));
}

MomentError moment_error(const Mat& samples, const PosteriorOracle& oracle) {
  require(samples.rows() >= 2, "moment_error: need at least two samples");
  require(samples.cols() == oracle.dim(), "moment_error: sample dimension mismatch");
  const Eigen::Index n = samples.rows();

  Vec mean = samples.colwise().mean();
  Mat centered = samples.rowwise() - mean.transpose();
  Mat cov = centered.transpose() * centered / static_cast<double>(n - 1);

  MomentError err;
  err.mean_err = (mean - oracle.mean()).norm();
  err.cov_err = (cov - oracle.cov()).norm();

  Vec soft = Vec::Zero(static_cast<Eigen::Index>(oracle.weights().size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    Vec x = samples.row(i).transpose();
    soft += oracle.responsibilities(x);
  }
  soft /= static_cast<double>(n);
  double werr = 0.0;
  for (std::size_t k = 0; k < oracle.weights().size(); ++k)
    werr = std::max(werr, std::abs(soft[static_cast<Eigen::Index>(k)] - oracle.weights()[k]));
  err.weight_err = werr;
  return err;
}

}  // namespace dapspp
