#include <doctest.h>

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "core/rng.hpp"
#include "core/schedule.hpp"

using namespace dapspp;

namespace {

int count_below(const std::vector<double>& sigmas, double tau) {
  return static_cast<int>(std::count_if(sigmas.begin(), sigmas.end(),
                                        [tau](double s) { return s <= tau; }));
}

}  // namespace

TEST_CASE("build_schedule matches the warp formula") {
  auto s = build_schedule(100.0, 0.1, 3, 7.0);
  REQUIRE(s.size() == 3);
  CHECK(s[0] == 100.0);
  CHECK(s[1] == doctest::Approx(7.178).epsilon(1e-3));
  CHECK(s[2] == 0.1);
}

TEST_CASE("build_schedule endpoints-only case") {
  auto s = build_schedule(100.0, 0.1, 2, -7.0);
  REQUIRE(s.size() == 2);
  CHECK(s[0] == 100.0);
  CHECK(s[1] == 0.1);
}

TEST_CASE("negative rho concentrates points at small noise") {
  auto fast = build_schedule(100.0, 0.1, 50, -7.0);
  auto slow = build_schedule(100.0, 0.1, 50, 7.0);
  CHECK(count_below(fast, 0.5) > count_below(slow, 0.5));
}

TEST_CASE("build_schedule rejects bad parameters") {
  CHECK_THROWS_AS(build_schedule(100.0, 0.1, 50, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(build_schedule(0.1, 0.1, 50, -7.0), std::invalid_argument);
  CHECK_THROWS_AS(build_schedule(0.05, 0.1, 50, -7.0), std::invalid_argument);
  CHECK_THROWS_AS(build_schedule(100.0, 0.1, 1, -7.0), std::invalid_argument);
}

TEST_CASE("schedules are strictly decreasing and endpoint-exact for random parameters") {
  Rng rng(20240901);
  for (int trial = 0; trial < 200; ++trial) {
    double smin = 0.01 + rng.uniform() * 0.5;
    double smax = smin * (2.0 + rng.uniform() * 500.0);
    int n = 2 + static_cast<int>(rng.uniform() * 80);
    double rho = (rng.uniform() - 0.5) * 16.0;
    if (rho == 0.0) rho = 3.0;
    auto s = build_schedule(smax, smin, n, rho);
    REQUIRE(s.size() == static_cast<std::size_t>(n));
    CHECK(s.front() == smax);
    CHECK(s.back() == smin);
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
      CHECK(s[i] > s[i + 1]);
      CHECK(s[i + 1] > 0.0);
    }
  }
}

TEST_CASE("density below any threshold is nonincreasing in rho") {
  const double rhos[] = {-7.0, -5.0, -2.0, 2.0, 5.0, 7.0};
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    double tau = 0.1 + rng.uniform() * 99.0;
    int prev = std::numeric_limits<int>::max();
    for (double rho : rhos) {
      int c = count_below(build_schedule(100.0, 0.1, 50, rho), tau);
      CHECK(c <= prev);
      prev = c;
    }
  }
}

TEST_CASE("step_size endpoints and midpoint") {
  StepSizeSchedule ss{1e-3, 1e-2};
  CHECK(step_size(ss, 1.0, 1.0) == doctest::Approx(1e-3).epsilon(1e-12));
  CHECK(step_size(ss, 0.0, 1.0) == doctest::Approx(1e-5).epsilon(1e-12));
  StepSizeSchedule ss2{1e-4, 1e-2};
  CHECK(step_size(ss2, 0.5, 1.0) == doctest::Approx(5.05e-5).epsilon(1e-12));
}

TEST_CASE("step_size is affine in t and bounded") {
  StepSizeSchedule ss{3e-4, 0.05};
  Rng rng(11);
  const double T = 2.5;
  for (int i = 0; i < 50; ++i) {
    double t1 = rng.uniform() * T;
    double t2 = rng.uniform() * T;
    double mid = step_size(ss, 0.5 * (t1 + t2), T);
    double avg = 0.5 * (step_size(ss, t1, T) + step_size(ss, t2, T));
    CHECK(mid == doctest::Approx(avg).epsilon(1e-12));
    CHECK(step_size(ss, t1, T) >= ss.eta0 * ss.delta);
    CHECK(step_size(ss, t1, T) <= ss.eta0);
  }
  CHECK_THROWS_AS(step_size(ss, -0.1, T), std::invalid_argument);
  CHECK_THROWS_AS(step_size(ss, T + 0.1, T), std::invalid_argument);
}

TEST_CASE("sigma_threshold scales gamma") {
  CHECK(sigma_threshold(0.05) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(sigma_threshold(0.01, 10.0) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(sigma_threshold(0.05, 4.0) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK_THROWS_AS(sigma_threshold(0.0), std::invalid_argument);
  CHECK_THROWS_AS(sigma_threshold(0.05, -1.0), std::invalid_argument);
}
