#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "core/common.hpp"

namespace dapspp {

// Forward measurement map y = A(x). Signals are flattened row-major vectors;
// image operators carry their own grid geometry.
class ForwardOperator {
 public:
  virtual ~ForwardOperator() = default;

  virtual std::string name() const = 0;
  virtual Eigen::Index input_dim() const = 0;
  virtual Eigen::Index output_dim() const = 0;
  virtual bool linear() const = 0;

  virtual Vec apply(const Vec& x) const = 0;

  // Jacobian-transpose action J(x)^T r; independent of x for linear maps.
  virtual Vec vjp(const Vec& x, const Vec& r) const = 0;

 protected:
  void check_input(const Vec& x) const {
    require(x.size() == input_dim(), name() + ": input shape mismatch");
  }
  void check_output(const Vec& r) const {
    require(r.size() == output_dim(), name() + ": output shape mismatch");
  }
};

class IdentityOp final : public ForwardOperator {
 public:
  explicit IdentityOp(Eigen::Index dim);
  std::string name() const override { return "identity"; }
  Eigen::Index input_dim() const override { return dim_; }
  Eigen::Index output_dim() const override { return dim_; }
  bool linear() const override { return true; }
  Vec apply(const Vec& x) const override;
  Vec vjp(const Vec& x, const Vec& r) const override;

 private:
  Eigen::Index dim_;
};

// Keeps the entries where mask == 1.
class MaskInpaintOp final : public ForwardOperator {
 public:
  explicit MaskInpaintOp(std::vector<int> mask);
  std::string name() const override { return "mask_inpaint"; }
  Eigen::Index input_dim() const override { return static_cast<Eigen::Index>(mask_.size()); }
  Eigen::Index output_dim() const override { return static_cast<Eigen::Index>(kept_.size()); }
  bool linear() const override { return true; }
  Vec apply(const Vec& x) const override;
  Vec vjp(const Vec& x, const Vec& r) const override;
  const std::vector<int>& mask() const { return mask_; }

 private:
  std::vector<int> mask_;
  std::vector<Eigen::Index> kept_;
};

// Cross-correlation with circular padding on a rows x cols grid. Covers the
// Gaussian and motion blur kernels; rows == 1 gives the 1-D case.
class Conv2dOp final : public ForwardOperator {
 public:
  Conv2dOp(Eigen::Index rows, Eigen::Index cols, Mat kernel);
  std::string name() const override { return "conv2d"; }
  Eigen::Index input_dim() const override { return rows_ * cols_; }
  Eigen::Index output_dim() const override { return rows_ * cols_; }
  bool linear() const override { return true; }
  Vec apply(const Vec& x) const override;
  Vec vjp(const Vec& x, const Vec& r) const override;
  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }
  const Mat& kernel() const { return kernel_; }

 private:
  Vec correlate(const Vec& x, bool flipped) const;
  Eigen::Index rows_, cols_;
  Mat kernel_;
  Eigen::Index kr_c_, kc_c_;  // kernel center offsets
};

// Block-mean downsampling by (factor_rows, factor_cols).
class DownsampleAvgOp final : public ForwardOperator {
 public:
  DownsampleAvgOp(Eigen::Index rows, Eigen::Index cols, Eigen::Index factor_rows,
                  Eigen::Index factor_cols);
  std::string name() const override { return "downsample_avg"; }
  Eigen::Index input_dim() const override { return rows_ * cols_; }
  Eigen::Index output_dim() const override { return (rows_ / fr_) * (cols_ / fc_); }
  bool linear() const override { return true; }
  Vec apply(const Vec& x) const override;
  Vec vjp(const Vec& x, const Vec& r) const override;

 private:
  Eigen::Index rows_, cols_, fr_, fc_;
};

// y = clip(alpha * x, -1, 1); saturation model for high dynamic range capture.
class HdrClipOp final : public ForwardOperator {
 public:
  HdrClipOp(Eigen::Index dim, double alpha = 2.0);
  std::string name() const override { return "hdr_clip"; }
  Eigen::Index input_dim() const override { return dim_; }
  Eigen::Index output_dim() const override { return dim_; }
  bool linear() const override { return false; }
  Vec apply(const Vec& x) const override;
  // Subgradient 0 exactly at the clip boundary.
  Vec vjp(const Vec& x, const Vec& r) const override;
  double alpha() const { return alpha_; }

 private:
  Eigen::Index dim_;
  double alpha_;
};

// y = |DFT(x)| on a zero-padded (oversample * rows) x (oversample * cols)
// grid. Non-invertible: invariant to a global sign flip of x.
class PhaseMagnitudeOp final : public ForwardOperator {
 public:
  PhaseMagnitudeOp(Eigen::Index rows, Eigen::Index cols, Eigen::Index oversample = 2);
  std::string name() const override { return "phase_magnitude"; }
  Eigen::Index input_dim() const override { return rows_ * cols_; }
  Eigen::Index output_dim() const override { return pr_ * pc_; }
  bool linear() const override { return false; }
  Vec apply(const Vec& x) const override;
  Vec vjp(const Vec& x, const Vec& r) const override;

 private:
  Eigen::MatrixXcd padded_dft(const Vec& x) const;
  Eigen::Index rows_, cols_, pr_, pc_;
  Eigen::MatrixXcd f_rows_, f_cols_;  // DFT matrices for the padded grid
};

Mat gaussian_kernel(int size, double std_dev);
Mat motion_kernel(int size);

Vec residual(const ForwardOperator& op, const Vec& x, const Vec& y);

// Ascent direction g used by the M-step update x <- x + eta*g + noise.
// PaperLiteral applies the full gradient of -(1/gamma^2)||y - A(x)||^2, which
// is twice the exact gradient of log N(y; A(x), gamma^2 I).
enum class GradConvention { PaperLiteral, ExactScore };
GradConvention grad_convention_from_string(const std::string& s);
std::string to_string(GradConvention c);

Vec likelihood_grad(const ForwardOperator& op, const Vec& x, const Vec& y, double gamma,
                    GradConvention convention);

// Dense matrix of a linear operator (desk-scale dimensions only).
Mat densify(const ForwardOperator& op);

// Smallest singular value above a rank tolerance; refuses nonlinear maps.
double min_nonzero_singular(const ForwardOperator& op);

struct Measurement {
  Vec y;
  double gamma = 0.0;
  std::shared_ptr<const ForwardOperator> op;

  void validate() const {
    require(op != nullptr, "measurement: missing operator");
    require(gamma > 0.0, "measurement: gamma must be positive");
    require(y.size() == op->output_dim(), "measurement: observation shape mismatch");
  }
};

}  // namespace dapspp
