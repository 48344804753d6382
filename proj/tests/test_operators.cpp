#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "core/operators.hpp"
#include "core/rng.hpp"
#include "oracles.hpp"

using namespace dapspp;

namespace {

std::vector<std::shared_ptr<const ForwardOperator>> linear_ops() {
  std::vector<std::shared_ptr<const ForwardOperator>> ops;
  ops.push_back(std::make_shared<IdentityOp>(16));
  std::vector<int> mask(64, 1);
  for (int i = 20; i < 36; ++i) mask[static_cast<std::size_t>(i)] = 0;
  ops.push_back(std::make_shared<MaskInpaintOp>(mask));
  ops.push_back(std::make_shared<Conv2dOp>(8, 8, gaussian_kernel(7, 1.5)));
  ops.push_back(std::make_shared<Conv2dOp>(8, 8, motion_kernel(5)));
  ops.push_back(std::make_shared<DownsampleAvgOp>(8, 8, 2, 2));
  ops.push_back(std::make_shared<DownsampleAvgOp>(1, 8, 1, 4));
  return ops;
}

bool linearity_probe(const ForwardOperator& op, Rng& rng) {
  Vec x = rng.normal_vec(op.input_dim());
  Vec z = rng.normal_vec(op.input_dim());
  double a = rng.normal(), b = rng.normal();
  Vec lhs = op.apply(a * x + b * z);
  Vec rhs = a * op.apply(x) + b * op.apply(z);
  return (lhs - rhs).norm() <= 1e-9 * std::max(1.0, rhs.norm());
}

}  // namespace

TEST_CASE("apply: selection, block means, hand convolution") {
  MaskInpaintOp mask({1, 0, 1});
  Vec x(3);
  x << 1, 2, 3;
  Vec y = mask.apply(x);
  REQUIRE(y.size() == 2);
  CHECK(y[0] == 1.0);
  CHECK(y[1] == 3.0);

  DownsampleAvgOp ds(1, 4, 1, 2);
  Vec x4(4);
  x4 << 1, 3, 5, 7;
  Vec y2 = ds.apply(x4);
  REQUIRE(y2.size() == 2);
  CHECK(y2[0] == doctest::Approx(2.0));
  CHECK(y2[1] == doctest::Approx(6.0));

  Mat k(1, 2);
  k << 0.5, 0.5;
  Conv2dOp conv(1, 2, k);
  Vec x2(2);
  x2 << 1, 3;
  Vec yc = conv.apply(x2);
  CHECK(yc[0] == doctest::Approx(2.0));
  CHECK(yc[1] == doctest::Approx(2.0));
}

TEST_CASE("identity vjp returns the cotangent") {
  IdentityOp id(5);
  Rng rng(1);
  Vec x = rng.normal_vec(5), r = rng.normal_vec(5);
  CHECK((id.vjp(x, r) - r).norm() == 0.0);
}

TEST_CASE("adjoint identity holds for every linear operator") {
  Rng rng(123);
  for (const auto& op : linear_ops()) {
    for (int probe = 0; probe < 100; ++probe) {
      Vec x = rng.normal_vec(op->input_dim());
      Vec r = rng.normal_vec(op->output_dim());
      double lhs = op->apply(x).dot(r);
      double rhs = x.dot(op->vjp(x, r));
      CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(lhs)));
    }
  }
}

TEST_CASE("linear operators pass and nonlinear operators fail the linearity probe") {
  Rng rng(5);
  for (const auto& op : linear_ops()) CHECK(linearity_probe(*op, rng));

  HdrClipOp clip(8);
  PhaseMagnitudeOp phase(4, 4, 2);
  int clip_failures = 0, phase_failures = 0;
  for (int i = 0; i < 10; ++i) {
    if (!linearity_probe(clip, rng)) ++clip_failures;
    if (!linearity_probe(phase, rng)) ++phase_failures;
  }
  CHECK(clip_failures > 0);
  CHECK(phase_failures > 0);
  CHECK_FALSE(clip.linear());
  CHECK_FALSE(phase.linear());
}

TEST_CASE("nonlinear vjp matches directional finite differences") {
  Rng rng(77);
  HdrClipOp clip(12, 2.0);
  for (int i = 0; i < 20; ++i) {
    Vec x = 0.6 * rng.normal_vec(12);
    // Keep probes away from the clip boundary where the subgradient jumps.
    for (int k = 0; k < 12; ++k) {
      if (std::abs(std::abs(2.0 * x[k]) - 1.0) < 1e-3) x[k] += 0.01;
    }
    Vec r = rng.normal_vec(12);
    Vec dir = rng.normal_vec(12);
    double got = dir.dot(clip.vjp(x, r));
    double want = r.dot(oracles::fd_jvp([&](const Vec& v) { return clip.apply(v); }, x, dir));
    CHECK(std::abs(got - want) <= 1e-5 * std::max(1.0, std::abs(want)));
  }

  PhaseMagnitudeOp phase(3, 3, 2);
  for (int i = 0; i < 20; ++i) {
    Vec x = rng.normal_vec(9);
    Vec r = rng.normal_vec(phase.output_dim());
    Vec dir = rng.normal_vec(9);
    double got = dir.dot(phase.vjp(x, r));
    double want = r.dot(oracles::fd_jvp([&](const Vec& v) { return phase.apply(v); }, x, dir));
    CHECK(std::abs(got - want) <= 1e-5 * std::max(1.0, std::abs(want)));
  }
}

TEST_CASE("hdr clip uses subgradient zero exactly at the boundary") {
  HdrClipOp clip(2, 2.0);
  Vec x(2);
  x << 0.5, 0.2;  // 2x = 1 exactly at the first coordinate
  Vec r = Vec::Ones(2);
  Vec g = clip.vjp(x, r);
  CHECK(g[0] == 0.0);
  CHECK(g[1] == doctest::Approx(2.0));
}

TEST_CASE("phase magnitude is invariant to a global sign flip") {
  PhaseMagnitudeOp phase(4, 4, 2);
  Rng rng(9);
  for (int i = 0; i < 10; ++i) {
    Vec x = rng.normal_vec(16);
    CHECK((phase.apply(x) - phase.apply(Vec(-x))).norm() <= 1e-12);
  }
}

TEST_CASE("smallest nonzero singular values") {
  CHECK(min_nonzero_singular(IdentityOp(4)) == doctest::Approx(1.0).epsilon(1e-12));
  MaskInpaintOp mask({1, 0, 1, 1, 0});
  CHECK(min_nonzero_singular(mask) == doctest::Approx(1.0).epsilon(1e-12));
  DownsampleAvgOp ds(1, 4, 1, 2);
  CHECK(min_nonzero_singular(ds) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  for (const auto& op : linear_ops()) CHECK(min_nonzero_singular(*op) > 0.0);
  CHECK_THROWS_AS(min_nonzero_singular(HdrClipOp(4)), std::invalid_argument);
}

TEST_CASE("residual definition") {
  Rng rng(2);
  Conv2dOp conv(4, 4, gaussian_kernel(3, 0.8));
  Vec x = rng.normal_vec(16);
  CHECK(residual(conv, x, conv.apply(x)).norm() <= 1e-14);

  IdentityOp id(6);
  Vec v = rng.normal_vec(6);
  CHECK((residual(id, Vec::Zero(6), v) - v).norm() == 0.0);

  Vec y = rng.normal_vec(16);
  CHECK(residual(conv, x, y).norm() == doctest::Approx((y - conv.apply(x)).norm()));
}

TEST_CASE("likelihood gradient conventions") {
  Rng rng(8);
  IdentityOp id(4);
  Vec x = rng.normal_vec(4);

  // Zero residual kills the gradient under both conventions.
  Vec y0 = id.apply(x);
  CHECK(likelihood_grad(id, x, y0, 0.3, GradConvention::PaperLiteral).norm() <= 1e-14);
  CHECK(likelihood_grad(id, x, y0, 0.3, GradConvention::ExactScore).norm() <= 1e-14);

  Vec v = rng.normal_vec(4);
  Vec g = likelihood_grad(id, Vec::Zero(4), v, 1.0, GradConvention::ExactScore);
  CHECK((g - v).norm() <= 1e-14);

  for (const auto& op : linear_ops()) {
    Vec xx = rng.normal_vec(op->input_dim());
    Vec yy = rng.normal_vec(op->output_dim());
    Vec lit = likelihood_grad(*op, xx, yy, 0.05, GradConvention::PaperLiteral);
    Vec exact = likelihood_grad(*op, xx, yy, 0.05, GradConvention::ExactScore);
    CHECK((lit - 2.0 * exact).norm() <= 1e-12 * std::max(1.0, lit.norm()));
  }
  CHECK_THROWS_AS(likelihood_grad(id, x, y0, 0.0, GradConvention::ExactScore),
                  std::invalid_argument);
}

TEST_CASE("operators reject mismatched shapes") {
  Conv2dOp conv(4, 4, gaussian_kernel(3, 1.0));
  CHECK_THROWS_AS(conv.apply(Vec::Zero(5)), std::invalid_argument);
  CHECK_THROWS_AS(conv.vjp(Vec::Zero(16), Vec::Zero(5)), std::invalid_argument);
  DownsampleAvgOp ds(4, 4, 2, 2);
  CHECK_THROWS_AS(ds.apply(Vec::Zero(15)), std::invalid_argument);
  CHECK_THROWS_AS(DownsampleAvgOp(5, 4, 2, 2), std::invalid_argument);
  CHECK_THROWS_AS(MaskInpaintOp(std::vector<int>{0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(MaskInpaintOp(std::vector<int>{1, 2}), std::invalid_argument);
}

TEST_CASE("measurement validation") {
  auto op = std::make_shared<IdentityOp>(3);
  Measurement good{Vec::Zero(3), 0.1, op};
  CHECK_NOTHROW(good.validate());
  Measurement bad_gamma{Vec::Zero(3), 0.0, op};
  CHECK_THROWS_AS(bad_gamma.validate(), std::invalid_argument);
  Measurement bad_dim{Vec::Zero(2), 0.1, op};
  CHECK_THROWS_AS(bad_dim.validate(), std::invalid_argument);
}
