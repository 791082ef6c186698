#pragma once

#include <string>
#include <vector>

#include "keyscope/nn/layer.hpp"

namespace keyscope::nn {

/// Inverted dropout over whole feature maps: in training each (sample, channel)
/// map is zeroed with probability p and survivors are scaled by 1 / (1 - p).
/// Inference is the identity.
template <typename Scalar>
class SpatialDropout final : public Layer<Scalar> {
 public:
  explicit SpatialDropout(double p) : p_(p) {
    if (!(p >= 0.0 && p < 1.0)) throw ConfigError("dropout probability must be in [0, 1), got " + std::to_string(p));
  }

  double p() const { return p_; }

  std::string signature() const override { return "Dropout"; }
  Shape output_shape(const Shape& in) const override { return in; }

  Tensor<Scalar> infer(const Tensor<Scalar>& x) const override { return x; }

  Tensor<Scalar> forward(const Tensor<Scalar>& x, RngStream& rng) override {
    const Shape& s = x.shape();
    mask_.assign(static_cast<std::size_t>(s.n) * s.c, Scalar(1));
    if (p_ == 0.0) return x;
    const auto keep_scale = static_cast<Scalar>(1.0 / (1.0 - p_));
    Tensor<Scalar> y = x;
    for (int n = 0; n < s.n; ++n) {
      for (int c = 0; c < s.c; ++c) {
        const Scalar m = rng.bernoulli(p_) ? Scalar(0) : keep_scale;
        mask_[static_cast<std::size_t>(n) * s.c + c] = m;
        y.channel(n, c) *= m;
      }
    }
    return y;
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& grad_out) override {
    const Shape& s = grad_out.shape();
    Tensor<Scalar> grad_in = grad_out;
    for (int n = 0; n < s.n; ++n) {
      for (int c = 0; c < s.c; ++c) grad_in.channel(n, c) *= mask_[static_cast<std::size_t>(n) * s.c + c];
    }
    return grad_in;
  }

  std::size_t cached_bytes() const override { return mask_.size() * sizeof(Scalar); }
  void clear_cache() override { mask_.clear(); }
  LayerPtr<Scalar> clone() const override { return std::make_unique<SpatialDropout>(*this); }

 private:
  double p_;
  std::vector<Scalar> mask_;
};

}  // namespace keyscope::nn
