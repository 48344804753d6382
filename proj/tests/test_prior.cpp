#include <doctest.h>

#include <cmath>

#include "core/prior.hpp"
#include "core/rng.hpp"
#include "oracles.hpp"

using namespace dapspp;

namespace {

GmmPrior make_gmm_2d() {
  std::vector<double> w{0.5, 0.3, 0.2};
  std::vector<Vec> mu(3, Vec(2));
  mu[0] << -1.5, -1.0;
  mu[1] << 1.2, 0.8;
  mu[2] << 0.0, 2.0;
  Mat c0(2, 2), c1(2, 2), c2(2, 2);
  c0 << 0.3, 0.05, 0.05, 0.2;
  c1 << 0.25, -0.04, -0.04, 0.35;
  c2 << 0.4, 0.1, 0.1, 0.3;
  return GmmPrior(w, mu, {c0, c1, c2});
}

}  // namespace

TEST_CASE("isotropic score is the conjugate shrinkage gradient") {
  IsotropicGaussianPrior prior(Vec::Zero(1), 1.0);
  Vec x(1);
  x << 2.0;
  CHECK(prior.score(x, 1.0)[0] == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK_THROWS_AS(prior.score(x, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(prior.score(Vec::Zero(3), 1.0), std::invalid_argument);
}

TEST_CASE("symmetric two-component mixture has zero score at the center") {
  std::vector<double> w{0.5, 0.5};
  Vec m(2);
  m << 1.0, -0.5;
  Mat c = 0.3 * Mat::Identity(2, 2);
  GmmPrior prior(w, {m, Vec(-m)}, {c, c});
  Vec s = prior.score(Vec::Zero(2), 0.7);
  CHECK(s.norm() == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("gmm score matches finite differences of log_density") {
  GmmPrior prior = make_gmm_2d();
  Rng rng(42);
  for (int i = 0; i < 20; ++i) {
    Vec x = 3.0 * rng.normal_vec(2);
    double sigma = std::exp(std::log(0.1) + rng.uniform() * std::log(100.0 / 0.1) / 1.0);
    Vec s = prior.score(x, sigma);
    Vec fd = oracles::fd_gradient([&](const Vec& v) { return prior.log_density(v, sigma); }, x);
    CHECK((s - fd).norm() <= 1e-5 * std::max(1.0, s.norm()));
  }
}

TEST_CASE("tweedie denoising: conjugate Gaussian and identity at zero noise") {
  IsotropicGaussianPrior prior(Vec::Zero(1), 1.0);
  Vec x(1);
  x << 2.0;
  CHECK(tweedie_denoise(prior, x, 1.0)[0] == doctest::Approx(1.0).epsilon(1e-15));

  Vec mu = Vec::Constant(4, -0.3);
  IsotropicGaussianPrior prior4(mu, 0.7);
  Rng rng(5);
  Vec v = rng.normal_vec(4);
  CHECK((tweedie_denoise(prior4, v, 0.0) - v).norm() == 0.0);

  // Closed-form conjugate mean at a few (x, sigma).
  for (double sigma : {0.3, 1.0, 4.0}) {
    Vec got = tweedie_denoise(prior4, v, sigma);
    Vec want = (0.7 * v + sigma * sigma * mu) / (0.7 + sigma * sigma);
    CHECK((got - want).norm() <= 1e-12);
  }
}

TEST_CASE("gmm tweedie equals the quadrature posterior mean") {
  GmmPrior prior = make_gmm_2d();
  Rng rng(777);
  for (int i = 0; i < 10; ++i) {
    Vec x = 2.0 * rng.normal_vec(2);
    double sigma = std::exp(std::log(0.1) + rng.uniform() * (std::log(100.0) - std::log(0.1)));
    Vec got = tweedie_denoise(prior, x, sigma);
    Vec want = oracles::gmm_posterior_mean_quadrature(prior, x, sigma);
    CHECK((got - want).norm() <= 1e-8 * std::max(1.0, want.norm()));
  }
}

TEST_CASE("log_density values and normalization") {
  IsotropicGaussianPrior std_normal(Vec::Zero(1), 1.0);
  CHECK(std_normal.log_density(Vec::Zero(1), 0.0) ==
        doctest::Approx(-0.5 * std::log(2.0 * std::numbers::pi)).epsilon(1e-14));

  // Degenerate one-component mixture agrees with the Gaussian density.
  Vec m(2);
  m << 0.4, -1.1;
  Mat c(2, 2);
  c << 0.5, 0.1, 0.1, 0.3;
  GmmPrior one = GmmPrior::single(m, c);
  Rng rng(3);
  for (int i = 0; i < 5; ++i) {
    Vec x = rng.normal_vec(2);
    double direct = -std::log(2.0 * std::numbers::pi) -
                    0.5 * std::log(c.determinant()) -
                    0.5 * (x - m).dot(c.inverse() * (x - m));
    CHECK(one.log_density(x, 0.0) == doctest::Approx(direct).epsilon(1e-12));
  }

  // 1-D mixture integrates to one on a fine grid.
  std::vector<double> w{0.7, 0.3};
  Vec m1(1), m2(1);
  m1 << -1.0;
  m2 << 2.0;
  Mat c1(1, 1), c2(1, 1);
  c1 << 0.5;
  c2 << 0.8;
  GmmPrior mix(w, {m1, m2}, {c1, c2});
  for (double sigma : {0.0, 0.5}) {
    const int n = 20001;
    const double lo = -20.0, hi = 20.0, h = (hi - lo) / (n - 1);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      Vec x(1);
      x << lo + h * i;
      double p = std::exp(mix.log_density(x, sigma));
      total += (i == 0 || i == n - 1) ? 0.5 * h * p : h * p;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-4));
  }

  CHECK(IsotropicGaussianPrior(Vec::Zero(2), 1.0).has_log_density());
}

TEST_CASE("score-density consistency across models") {
  Rng rng(99);
  IsotropicGaussianPrior iso(Vec::Constant(3, 0.2), 0.5);
  GmmPrior gmm = make_gmm_2d();
  for (int i = 0; i < 20; ++i) {
    double sigma = 0.1 * std::pow(1000.0, rng.uniform());
    {
      Vec x = 2.0 * rng.normal_vec(3);
      Vec s = iso.score(x, sigma);
      Vec fd = oracles::fd_gradient([&](const Vec& v) { return iso.log_density(v, sigma); }, x);
      CHECK((s - fd).norm() <= 1e-5 * std::max(1.0, s.norm()));
    }
    {
      Vec x = 2.0 * rng.normal_vec(2);
      Vec s = gmm.score(x, sigma);
      Vec fd = oracles::fd_gradient([&](const Vec& v) { return gmm.log_density(v, sigma); }, x);
      CHECK((s - fd).norm() <= 1e-5 * std::max(1.0, s.norm()));
    }
  }
}

TEST_CASE("smoothing composes like the heat semigroup") {
  GmmPrior prior = make_gmm_2d();
  const double s1 = 0.8, s2 = 1.7;
  std::vector<Mat> smoothed;
  for (const Mat& c : prior.covariances()) smoothed.push_back(c + s1 * s1 * Mat::Identity(2, 2));
  GmmPrior once(prior.weights(), prior.means(), smoothed);
  Rng rng(12);
  for (int i = 0; i < 10; ++i) {
    Vec x = 3.0 * rng.normal_vec(2);
    double direct = prior.log_density(x, std::sqrt(s1 * s1 + s2 * s2));
    double composed = once.log_density(x, s2);
    CHECK(composed == doctest::Approx(direct).epsilon(1e-10));
  }
}

TEST_CASE("sample_prior: moments, component frequencies, determinism") {
  Vec mu = Vec::Constant(3, 1.5);
  const double tau2 = 0.49;
  IsotropicGaussianPrior iso(mu, tau2);
  Rng rng(2024);
  const int n = 100000;
  Vec sum = Vec::Zero(3);
  for (int i = 0; i < n; ++i) sum += iso.sample(rng);
  Vec mean = sum / n;
  const double tol = 4.0 * std::sqrt(tau2) / std::sqrt(static_cast<double>(n));
  for (int k = 0; k < 3; ++k) CHECK(std::abs(mean[k] - mu[k]) <= tol);

  GmmPrior gmm = make_gmm_2d();
  Rng rng2(2025);
  std::vector<int> counts(3, 0);
  for (int i = 0; i < n; ++i) {
    Vec x = gmm.sample(rng2);
    Vec r = gmm.responsibilities(x, 0.0);
    Eigen::Index best;
    r.maxCoeff(&best);
    counts[static_cast<std::size_t>(best)]++;
  }
  for (std::size_t k = 0; k < 3; ++k) {
    double freq = static_cast<double>(counts[k]) / n;
    CHECK(std::abs(freq - gmm.weights()[k]) <= 0.02);
  }

  Rng a(31), b(31);
  CHECK((gmm.sample(a) - gmm.sample(b)).norm() == 0.0);
}

TEST_CASE("score norms decay like C / sigma at large noise") {
  GmmPrior gmm = make_gmm_2d();
  Rng rng(55);
  double c_ref = 0.0;
  for (int i = 0; i < 200; ++i) {
    Vec x = gmm.sample(rng) + 10.0 * rng.normal_vec(2);
    c_ref = std::max(c_ref, 10.0 * gmm.score(x, 10.0).norm());
  }
  for (double sigma : {50.0, 100.0, 500.0}) {
    double c_here = 0.0;
    Rng inner(56);
    for (int i = 0; i < 200; ++i) {
      Vec x = gmm.sample(inner) + sigma * inner.normal_vec(2);
      c_here = std::max(c_here, sigma * gmm.score(x, sigma).norm());
    }
    CHECK(c_here <= 1.5 * c_ref);
  }
}

TEST_CASE("gmm prior validates its inputs") {
  Vec m(1);
  m << 0.0;
  Mat c(1, 1);
  c << 1.0;
  CHECK_THROWS_AS(GmmPrior({-0.5, 1.5}, {m, m}, {c, c}), std::invalid_argument);
  Mat bad(1, 1);
  bad << -1.0;
  CHECK_THROWS_AS(GmmPrior({1.0}, {m}, {bad}), std::invalid_argument);
  Mat asym(2, 2);
  asym << 1.0, 0.5, -0.5, 1.0;
  Vec m2 = Vec::Zero(2);
  CHECK_THROWS_AS(GmmPrior({1.0}, {m2}, {asym}), std::invalid_argument);
}
