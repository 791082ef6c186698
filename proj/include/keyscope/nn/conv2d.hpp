#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "keyscope/nn/layer.hpp"

namespace keyscope::nn {

/// Stride-1 convolution with "same" zero padding and an odd square kernel,
/// lowered to one GEMM per sample via im2col.
template <typename Scalar>
class Conv2d final : public Layer<Scalar> {
 public:
  Conv2d(int in_channels, int out_channels, int kernel)
      : in_(in_channels),
        out_(out_channels),
        k_(kernel),
        weight_("weight", Shape{out_channels, in_channels, kernel, kernel}),
        bias_("bias", Shape{1, out_channels, 1, 1}) {
    if (kernel < 1 || kernel % 2 == 0) throw ShapeError("conv kernel size must be odd, got " + std::to_string(kernel));
    if (in_channels < 1 || out_channels < 1) throw ShapeError("conv channel counts must be >= 1");
  }

  /// Uniform in +-sqrt(6 / fan_in); zero bias.
  void init(RngStream& rng) {
    const double bound = std::sqrt(6.0 / (in_ * k_ * k_));
    for (auto& v : weight_.value.array()) v = static_cast<Scalar>(rng.uniform(-bound, bound));
    bias_.value.set_zero();
  }

  int in_channels() const { return in_; }
  int out_channels() const { return out_; }
  int kernel() const { return k_; }
  Parameter<Scalar>& weight() { return weight_; }
  Parameter<Scalar>& bias() { return bias_; }

  std::string signature() const override {
    return "Conv" + std::to_string(k_) + "x" + std::to_string(k_) + "(" + std::to_string(out_) + ")";
  }

  Shape output_shape(const Shape& in) const override {
    check(in);
    return Shape{in.n, out_, in.h, in.w};
  }

  Tensor<Scalar> infer(const Tensor<Scalar>& x) const override {
    const Shape& s = x.shape();
    Tensor<Scalar> y(output_shape(s));
    const ConstRowMatrixMap<Scalar> w(weight_.value.data(), out_, in_ * k_ * k_);
    const auto b = bias_.value.array().matrix();
    RowMatrix<Scalar> col;
    for (int n = 0; n < s.n; ++n) {
      auto out = y.sample(n);
      if (k_ == 1) {
        out.noalias() = w * x.sample(n);
      } else {
        im2col(x, n, col);
        out.noalias() = w * col;
      }
      out.colwise() += b;
    }
    return y;
  }

  Tensor<Scalar> forward(const Tensor<Scalar>& x, RngStream&) override {
    input_ = x;
    return infer(x);
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& grad_out) override {
    const Shape& s = input_.shape();
    Tensor<Scalar> grad_in(s);
    const ConstRowMatrixMap<Scalar> w(weight_.value.data(), out_, in_ * k_ * k_);
    RowMatrixMap<Scalar> dw(weight_.grad.data(), out_, in_ * k_ * k_);
    auto& db = bias_.grad.array();
    RowMatrix<Scalar> col, dcol;
    for (int n = 0; n < s.n; ++n) {
      const auto g = grad_out.sample(n);
      db += g.rowwise().sum().array();
      if (k_ == 1) {
        dw.noalias() += g * input_.sample(n).transpose();
        grad_in.sample(n).noalias() = w.transpose() * g;
      } else {
        im2col(input_, n, col);
        dw.noalias() += g * col.transpose();
        dcol.noalias() = w.transpose() * g;
        col2im(dcol, grad_in, n);
      }
    }
    return grad_in;
  }

  std::vector<Parameter<Scalar>*> parameters() override { return {&weight_, &bias_}; }
  std::size_t cached_bytes() const override { return input_.bytes(); }
  void clear_cache() override { input_ = Tensor<Scalar>(); }
  LayerPtr<Scalar> clone() const override { return std::make_unique<Conv2d>(*this); }

 private:
  void check(const Shape& in) const {
    if (in.c != in_) {
      throw ShapeError("conv expects " + std::to_string(in_) + " input channels, got " + std::to_string(in.c));
    }
  }

  // Rows enumerate (channel, ky, kx); columns enumerate output positions (y, x).
  void im2col(const Tensor<Scalar>& x, int n, RowMatrix<Scalar>& col) const {
    const Shape& s = x.shape();
    const int pad = k_ / 2;
    col.resize(static_cast<Eigen::Index>(in_) * k_ * k_, s.spatial());
    const Scalar* src = x.data() + static_cast<std::size_t>(n) * x.per_sample();
    for (int c = 0; c < in_; ++c) {
      const Scalar* plane = src + static_cast<std::size_t>(c) * s.spatial();
      for (int ky = 0; ky < k_; ++ky) {
        for (int kx = 0; kx < k_; ++kx) {
          Scalar* row = col.data() + (static_cast<std::size_t>(c * k_ + ky) * k_ + kx) * s.spatial();
          const int dx = kx - pad;
          const int x0 = std::max(0, -dx);
          const int x1 = std::min(s.w, s.w - dx);
          for (int y = 0; y < s.h; ++y) {
            Scalar* dst = row + static_cast<std::size_t>(y) * s.w;
            const int sy = y + ky - pad;
            if (sy < 0 || sy >= s.h || x0 >= x1) {
              std::fill(dst, dst + s.w, Scalar(0));
              continue;
            }
            std::fill(dst, dst + x0, Scalar(0));
            std::copy(plane + static_cast<std::size_t>(sy) * s.w + x0 + dx, plane + static_cast<std::size_t>(sy) * s.w + x1 + dx,
                      dst + x0);
            std::fill(dst + x1, dst + s.w, Scalar(0));
          }
        }
      }
    }
  }

  void col2im(const RowMatrix<Scalar>& col, Tensor<Scalar>& grad_in, int n) const {
    const Shape& s = grad_in.shape();
    const int pad = k_ / 2;
    Scalar* dst_base = grad_in.data() + static_cast<std::size_t>(n) * grad_in.per_sample();
    for (int c = 0; c < in_; ++c) {
      Scalar* plane = dst_base + static_cast<std::size_t>(c) * s.spatial();
      for (int ky = 0; ky < k_; ++ky) {
        for (int kx = 0; kx < k_; ++kx) {
          const Scalar* row = col.data() + (static_cast<std::size_t>(c * k_ + ky) * k_ + kx) * s.spatial();
          const int dx = kx - pad;
          const int x0 = std::max(0, -dx);
          const int x1 = std::min(s.w, s.w - dx);
          for (int y = 0; y < s.h; ++y) {
            const int sy = y + ky - pad;
            if (sy < 0 || sy >= s.h) continue;
            const Scalar* src = row + static_cast<std::size_t>(y) * s.w;
            Scalar* dst = plane + static_cast<std::size_t>(sy) * s.w + dx;
            for (int xx = x0; xx < x1; ++xx) dst[xx] += src[xx];
          }
        }
      }
    }
  }

  int in_;
  int out_;
  int k_;
  Parameter<Scalar> weight_;
  Parameter<Scalar> bias_;
  Tensor<Scalar> input_;
};

}  // namespace keyscope::nn
