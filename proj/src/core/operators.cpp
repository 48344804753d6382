#include "core/operators.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/SVD>

namespace dapspp {

IdentityOp::IdentityOp(Eigen::Index dim) : dim_(dim) {
  require(dim_ > 0, "identity: dimension must be positive");
}

Vec IdentityOp::apply(const Vec& x) const {
  check_input(x);
  return x;
}

Vec IdentityOp::vjp(const Vec& x, const Vec& r) const {
  check_input(x);
  check_output(r);
  return r;
}

MaskInpaintOp::MaskInpaintOp(std::vector<int> mask) : mask_(std::move(mask)) {
  require(!mask_.empty(), "mask_inpaint: empty mask");
  for (std::size_t i = 0; i < mask_.size(); ++i) {
    require(mask_[i] == 0 || mask_[i] == 1, "mask_inpaint: mask entries must be 0 or 1");
    if (mask_[i] == 1) kept_.push_back(static_cast<Eigen::Index>(i));
  }
  require(!kept_.empty(), "mask_inpaint: mask keeps no entries");
}

Vec MaskInpaintOp::apply(const Vec& x) const {
  check_input(x);
  Vec y(output_dim());
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = x[kept_[static_cast<std::size_t>(i)]];
  return y;
}

Vec MaskInpaintOp::vjp(const Vec& x, const Vec& r) const {
  check_input(x);
  check_output(r);
  Vec g = Vec::Zero(input_dim());
  for (Eigen::Index i = 0; i < r.size(); ++i) g[kept_[static_cast<std::size_t>(i)]] = r[i];
  return g;
}

Conv2dOp::Conv2dOp(Eigen::Index rows, Eigen::Index cols, Mat kernel)
    : rows_(rows), cols_(cols), kernel_(std::move(kernel)) {
  require(rows_ > 0 && cols_ > 0, "conv2d: grid must be nonempty");
  require(kernel_.rows() > 0 && kernel_.cols() > 0, "conv2d: empty kernel");
  require(kernel_.rows() <= rows_ && kernel_.cols() <= cols_,
          "conv2d: kernel larger than grid");
  kr_c_ = (kernel_.rows() - 1) / 2;
  kc_c_ = (kernel_.cols() - 1) / 2;
}

Vec Conv2dOp::correlate(const Vec& x, bool flipped) const {
  Vec y(rows_ * cols_);
  const Eigen::Index kr = kernel_.rows(), kc = kernel_.cols();
  for (Eigen::Index i = 0; i < rows_; ++i) {
    for (Eigen::Index j = 0; j < cols_; ++j) {
      double acc = 0.0;
      for (Eigen::Index a = 0; a < kr; ++a) {
        for (Eigen::Index b = 0; b < kc; ++b) {
          Eigen::Index di = a - kr_c_, dj = b - kc_c_;
          Eigen::Index si = flipped ? i - di : i + di;
          Eigen::Index sj = flipped ? j - dj : j + dj;
          si = ((si % rows_) + rows_) % rows_;
          sj = ((sj % cols_) + cols_) % cols_;
          acc += kernel_(a, b) * x[si * cols_ + sj];
        }
      }
      y[i * cols_ + j] = acc;
    }
  }
  return y;
}

Vec Conv2dOp::apply(const Vec& x) const {
  check_input(x);
  return correlate(x, false);
}

Vec Conv2dOp::vjp(const Vec& x, const Vec& r) const {
  check_input(x);
  check_output(r);
  return correlate(r, true);
}

DownsampleAvgOp::DownsampleAvgOp(Eigen::Index rows, Eigen::Index cols, Eigen::Index factor_rows,
                                 Eigen::Index factor_cols)
    : rows_(rows), cols_(cols), fr_(factor_rows), fc_(factor_cols) {
  require(rows_ > 0 && cols_ > 0, "downsample_avg: grid must be nonempty");
  require(fr_ > 0 && fc_ > 0, "downsample_avg: factors must be positive");
  require(rows_ % fr_ == 0 && cols_ % fc_ == 0,
          "downsample_avg: grid must divide evenly by the factors");
}

Vec DownsampleAvgOp::apply(const Vec& x) const {
  check_input(x);
  const Eigen::Index out_rows = rows_ / fr_, out_cols = cols_ / fc_;
  Vec y = Vec::Zero(out_rows * out_cols);
  const double scale = 1.0 / static_cast<double>(fr_ * fc_);
  for (Eigen::Index i = 0; i < rows_; ++i)
    for (Eigen::Index j = 0; j < cols_; ++j)
      y[(i / fr_) * out_cols + (j / fc_)] += scale * x[i * cols_ + j];
  return y;
}

Vec DownsampleAvgOp::vjp(const Vec& x, const Vec& r) const {
  check_input(x);
  check_output(r);
  const Eigen::Index out_cols = cols_ / fc_;
  Vec g(input_dim());
  const double scale = 1.0 / static_cast<double>(fr_ * fc_);
  for (Eigen::Index i = 0; i < rows_; ++i)
    for (Eigen::Index j = 0; j < cols_; ++j)
      g[i * cols_ + j] = scale * r[(i / fr_) * out_cols + (j / fc_)];
  return g;
}

HdrClipOp::HdrClipOp(Eigen::Index dim, double alpha) : dim_(dim), alpha_(alpha) {
  require(dim_ > 0, "hdr_clip: dimension must be positive");
  require(alpha_ > 0.0, "hdr_clip: alpha must be positive");
}

Vec HdrClipOp::apply(const Vec& x) const {
  check_input(x);
  return (alpha_ * x).cwiseMax(-1.0).cwiseMin(1.0);
}

Vec HdrClipOp::vjp(const Vec& x, const Vec& r) const {
  check_input(x);
  check_output(r);
  Vec g(dim_);
  for (Eigen::Index i = 0; i < dim_; ++i) {
    double s = alpha_ * x[i];
    g[i] = (s > -1.0 && s < 1.0) ? alpha_ * r[i] : 0.0;
  }
  return g;
}

PhaseMagnitudeOp::PhaseMagnitudeOp(Eigen::Index rows, Eigen::Index cols, Eigen::Index oversample)
    : rows_(rows), cols_(cols), pr_(rows * oversample), pc_(cols * oversample) {
  require(rows_ > 0 && cols_ > 0, "phase_magnitude: grid must be nonempty");
  require(oversample >= 1, "phase_magnitude: oversample must be at least 1");
  const std::complex<double> j(0.0, 1.0);
  f_rows_.resize(pr_, pr_);
  for (Eigen::Index a = 0; a < pr_; ++a)
    for (Eigen::Index b = 0; b < pr_; ++b)
      f_rows_(a, b) = std::exp(-2.0 * std::numbers::pi * j *
                               (static_cast<double>(a * b) / static_cast<double>(pr_)));
  f_cols_.resize(pc_, pc_);
  for (Eigen::Index a = 0; a < pc_; ++a)
    for (Eigen::Index b = 0; b < pc_; ++b)
      f_cols_(a, b) = std::exp(-2.0 * std::numbers::pi * j *
                               (static_cast<double>(a * b) / static_cast<double>(pc_)));
}

Eigen::MatrixXcd PhaseMagnitudeOp::padded_dft(const Vec& x) const {
  Eigen::MatrixXcd z = Eigen::MatrixXcd::Zero(pr_, pc_);
  for (Eigen::Index i = 0; i < rows_; ++i)
    for (Eigen::Index jx = 0; jx < cols_; ++jx) z(i, jx) = x[i * cols_ + jx];
  return f_rows_ * z * f_cols_.transpose();
}

Vec PhaseMagnitudeOp::apply(const Vec& x) const {
  check_input(x);
  Eigen::MatrixXcd c = padded_dft(x);
  Vec y(pr_ * pc_);
  for (Eigen::Index i = 0; i < pr_; ++i)
    for (Eigen::Index jx = 0; jx < pc_; ++jx) y[i * pc_ + jx] = std::abs(c(i, jx));
  return y;
}

Vec PhaseMagnitudeOp::vjp(const Vec& x, const Vec& r) const {
  check_input(x);
  check_output(r);
  Eigen::MatrixXcd c = padded_dft(x);
  // d|c|/dx pulled back through the DFT: w = r .* c/|c|, grad = Re(F^H w F*).
  Eigen::MatrixXcd w(pr_, pc_);
  for (Eigen::Index i = 0; i < pr_; ++i) {
    for (Eigen::Index jx = 0; jx < pc_; ++jx) {
      double mag = std::abs(c(i, jx));
      w(i, jx) = mag > 0.0 ? r[i * pc_ + jx] * c(i, jx) / mag : std::complex<double>(0.0, 0.0);
    }
  }
  Eigen::MatrixXcd back = f_rows_.adjoint() * w * f_cols_.conjugate();
  Vec g(rows_ * cols_);
  for (Eigen::Index i = 0; i < rows_; ++i)
    for (Eigen::Index jx = 0; jx < cols_; ++jx) g[i * cols_ + jx] = back(i, jx).real();
  return g;
}

Mat gaussian_kernel(int size, double std_dev) {
  require(size >= 1 && size % 2 == 1, "gaussian_kernel: size must be odd and positive");
  require(std_dev > 0.0, "gaussian_kernel: std must be positive");
  Mat k(size, size);
  const int c = size / 2;
  for (int i = 0; i < size; ++i)
    for (int j = 0; j < size; ++j) {
      double di = i - c, dj = j - c;
      k(i, j) = std::exp(-(di * di + dj * dj) / (2.0 * std_dev * std_dev));
    }
  k /= k.sum();
  return k;
}

Mat motion_kernel(int size) {
  require(size >= 1, "motion_kernel: size must be positive");
  return Mat::Constant(1, size, 1.0 / static_cast<double>(size));
}

Vec residual(const ForwardOperator& op, const Vec& x, const Vec& y) {
  require(y.size() == op.output_dim(), "residual: observation shape mismatch");
  return y - op.apply(x);
}

GradConvention grad_convention_from_string(const std::string& s) {
  if (s == "paper_literal") return GradConvention::PaperLiteral;
  if (s == "exact_score") return GradConvention::ExactScore;
  throw ConfigError("unknown grad_convention '" + s + "'");
}

std::string to_string(GradConvention c) {
  return c == GradConvention::PaperLiteral ? "paper_literal" : "exact_score";
}

Vec likelihood_grad(const ForwardOperator& op, const Vec& x, const Vec& y, double gamma,
                    GradConvention convention) {
  require(gamma > 0.0, "likelihood_grad: gamma must be positive");
  Vec r = residual(op, x, y);
  double scale = (convention == GradConvention::PaperLiteral ? 2.0 : 1.0) / (gamma * gamma);
  return scale * op.vjp(x, r);
}

Mat densify(const ForwardOperator& op) {
  Mat a(op.output_dim(), op.input_dim());
  Vec e = Vec::Zero(op.input_dim());
  for (Eigen::Index j = 0; j < op.input_dim(); ++j) {
    e[j] = 1.0;
    a.col(j) = op.apply(e);
    e[j] = 0.0;
  }
  return a;
}

double min_nonzero_singular(const ForwardOperator& op) {
  require(op.linear(), "min_nonzero_singular: operator must be linear");
  Mat a = densify(op);
  Eigen::BDCSVD<Mat> svd(a);
  const Vec& s = svd.singularValues();
  require(s.size() > 0, "min_nonzero_singular: empty spectrum");
  const double tol = std::max(a.rows(), a.cols()) *
                     std::numeric_limits<double>::epsilon() * s[0];
  double smallest = -1.0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > tol) smallest = s[i];
  require(smallest > 0.0, "min_nonzero_singular: operator is numerically zero");
  return smallest;
}

}  // namespace dapspp
