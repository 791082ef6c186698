#pragma once

#include <cmath>
#include <string>

#include "keyscope/nn/layer.hpp"

namespace keyscope::nn {

/// Exponential-linear unit with alpha = 1.
template <typename Scalar>
class Elu final : public Layer<Scalar> {
 public:
  static Scalar apply(Scalar v) { return v > Scalar(0) ? v : std::expm1(v); }

  std::string signature() const override { return "ELU"; }
  Shape output_shape(const Shape& in) const override { return in; }

  Tensor<Scalar> infer(const Tensor<Scalar>& x) const override {
    Tensor<Scalar> y(x.shape());
    y.array() = x.array().unaryExpr([](Scalar v) { return apply(v); });
    return y;
  }

  Tensor<Scalar> forward(const Tensor<Scalar>& x, RngStream&) override {
    input_ = x;
    return infer(x);
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& grad_out) override {
    Tensor<Scalar> grad_in(input_.shape());
    grad_in.array() = grad_out.array() *
                      input_.array().unaryExpr([](Scalar v) { return v > Scalar(0) ? Scalar(1) : std::exp(v); });
    return grad_in;
  }

  std::size_t cached_bytes() const override { return input_.bytes(); }
  void clear_cache() override { input_ = Tensor<Scalar>(); }
  LayerPtr<Scalar> clone() const override { return std::make_unique<Elu>(*this); }

 private:
  Tensor<Scalar> input_;
};

}  // namespace keyscope::nn
