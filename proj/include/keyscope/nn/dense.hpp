#pragma once

#include <cmath>
#include <string>

#include "keyscope/nn/layer.hpp"

namespace keyscope::nn {

/// Affine map applied independently to every time frame.
///
/// Each frame's (channels x height) column is flattened channel-major and mapped
/// to `out_features`: (N, C, H, W) -> (N, out_features, 1, W). With W = 1 this is
/// an ordinary fully connected layer.
template <typename Scalar>
class Dense final : public Layer<Scalar> {
 public:
  Dense(int in_features, int out_features)
      : in_(in_features),
        out_(out_features),
        weight_("weight", Shape{out_features, in_features, 1, 1}),
        bias_("bias", Shape{1, out_features, 1, 1}) {
    if (in_features < 1 || out_features < 1) throw ShapeError("dense feature counts must be >= 1");
  }

  void init(RngStream& rng) {
    const double bound = std::sqrt(6.0 / in_);
    for (auto& v : weight_.value.array()) v = static_cast<Scalar>(rng.uniform(-bound, bound));
    bias_.value.set_zero();
  }

  int in_features() const { return in_; }
  int out_features() const { return out_; }
  Parameter<Scalar>& weight() { return weight_; }
  Parameter<Scalar>& bias() { return bias_; }

  std::string signature() const override { return "Dense(" + std::to_string(out_) + ")"; }

  Shape output_shape(const Shape& in) const override {
    if (in.c * in.h != in_) {
      throw ShapeError("dense expects " + std::to_string(in_) + " features per frame, got " +
                       std::to_string(in.c * in.h) + " from " + in.str());
    }
    return Shape{in.n, out_, 1, in.w};
  }

  Tensor<Scalar> infer(const Tensor<Scalar>& x) const override {
    const Shape& s = x.shape();
    Tensor<Scalar> y(output_shape(s));
    const ConstRowMatrixMap<Scalar> w(weight_.value.data(), out_, in_);
    const auto b = bias_.value.array().matrix();
    for (int n = 0; n < s.n; ++n) {
      RowMatrixMap<Scalar> out(y.data() + static_cast<std::size_t>(n) * y.per_sample(), out_, s.w);
      out.noalias() = w * frames(x, n);
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
    const ConstRowMatrixMap<Scalar> w(weight_.value.data(), out_, in_);
    RowMatrixMap<Scalar> dw(weight_.grad.data(), out_, in_);
    auto& db = bias_.grad.array();
    for (int n = 0; n < s.n; ++n) {
      const ConstRowMatrixMap<Scalar> g(grad_out.data() + static_cast<std::size_t>(n) * grad_out.per_sample(), out_,
                                        s.w);
      dw.noalias() += g * frames(input_, n).transpose();
      db += g.rowwise().sum().array();
      RowMatrixMap<Scalar>(grad_in.data() + static_cast<std::size_t>(n) * grad_in.per_sample(), in_, s.w).noalias() =
          w.transpose() * g;
    }
    return grad_in;
  }

  std::vector<Parameter<Scalar>*> parameters() override { return {&weight_, &bias_}; }
  std::size_t cached_bytes() const override { return input_.bytes(); }
  void clear_cache() override { input_ = Tensor<Scalar>(); }
  LayerPtr<Scalar> clone() const override { return std::make_unique<Dense>(*this); }

 private:
  // Row-major (C, H, W) storage is already the (C*H, W) matrix of frame vectors.
  ConstRowMatrixMap<Scalar> frames(const Tensor<Scalar>& x, int n) const {
    return ConstRowMatrixMap<Scalar>(x.data() + static_cast<std::size_t>(n) * x.per_sample(), in_, x.shape().w);
  }

  int in_;
  int out_;
  Parameter<Scalar> weight_;
  Parameter<Scalar> bias_;
  Tensor<Scalar> input_;
};

}  // namespace keyscope::nn
