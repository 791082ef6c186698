#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "keyscope/nn/layer.hpp"

namespace keyscope::nn {

/// Per-channel batch normalisation over batch x height x width.
template <typename Scalar>
class BatchNorm2d final : public Layer<Scalar> {
 public:
  static constexpr double kDefaultMomentum = 0.1;
  static constexpr double kDefaultEps = 1e-5;

  explicit BatchNorm2d(int channels, double momentum = kDefaultMomentum, double eps = kDefaultEps)
      : channels_(channels),
        momentum_(momentum),
        eps_(eps),
        gamma_("gamma", Shape{1, channels, 1, 1}),
        beta_("beta", Shape{1, channels, 1, 1}),
        running_mean_(Shape{1, channels, 1, 1}, Scalar(0)),
        running_var_(Shape{1, channels, 1, 1}, Scalar(1)) {
    gamma_.value.array().setOnes();
  }

  int channels() const { return channels_; }
  double momentum() const { return momentum_; }
  double eps() const { return eps_; }
  Parameter<Scalar>& gamma() { return gamma_; }
  Parameter<Scalar>& beta() { return beta_; }
  const Tensor<Scalar>& running_mean() const { return running_mean_; }
  const Tensor<Scalar>& running_var() const { return running_var_; }

  std::string signature() const override { return "BN"; }

  Shape output_shape(const Shape& in) const override {
    if (in.c != channels_) {
      throw ShapeError("batchnorm expects " + std::to_string(channels_) + " channels, got " + std::to_string(in.c));
    }
    return in;
  }

  Tensor<Scalar> infer(const Tensor<Scalar>& x) const override {
    const Shape s = output_shape(x.shape());
    Tensor<Scalar> y(s);
    for (int c = 0; c < s.c; ++c) {
      const double inv_std = 1.0 / std::sqrt(static_cast<double>(running_var_.array()[c]) + eps_);
      const double g = gamma_.value.array()[c];
      const auto scale = static_cast<Scalar>(g * inv_std);
      const auto shift = static_cast<Scalar>(beta_.value.array()[c] - running_mean_.array()[c] * g * inv_std);
      for (int n = 0; n < s.n; ++n) y.channel(n, c) = x.channel(n, c) * scale + shift;
    }
    return y;
  }

  Tensor<Scalar> forward(const Tensor<Scalar>& x, RngStream&) override {
    const Shape s = output_shape(x.shape());
    const double count = static_cast<double>(s.n) * s.spatial();
    normalized_ = Tensor<Scalar>(s);
    inv_std_.assign(static_cast<std::size_t>(s.c), 0.0);
    Tensor<Scalar> y(s);
    for (int c = 0; c < s.c; ++c) {
      double sum = 0.0;
      for (int n = 0; n < s.n; ++n) sum += x.channel(n, c).template cast<double>().sum();
      const double mean = sum / count;
      double sq = 0.0;
      for (int n = 0; n < s.n; ++n) sq += (x.channel(n, c).template cast<double>() - mean).square().sum();
      const double var = sq / count;
      const double inv_std = 1.0 / std::sqrt(var + eps_);
      inv_std_[c] = inv_std;
      const Scalar g = gamma_.value.array()[c];
      const Scalar b = beta_.value.array()[c];
      for (int n = 0; n < s.n; ++n) {
        auto xhat = normalized_.channel(n, c);
        xhat = ((x.channel(n, c).template cast<double>() - mean) * inv_std).template cast<Scalar>();
        y.channel(n, c) = xhat * g + b;
      }
      running_mean_.array()[c] = static_cast<Scalar>((1.0 - momentum_) * running_mean_.array()[c] + momentum_ * mean);
      running_var_.array()[c] = static_cast<Scalar>((1.0 - momentum_) * running_var_.array()[c] + momentum_ * var);
    }
    return y;
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& grad_out) override {
    const Shape s = normalized_.shape();
    const double count = static_cast<double>(s.n) * s.spatial();
    Tensor<Scalar> grad_in(s);
    for (int c = 0; c < s.c; ++c) {
      double sum_dy = 0.0;
      double sum_dy_xhat = 0.0;
      for (int n = 0; n < s.n; ++n) {
        const auto dy = grad_out.channel(n, c);
        const auto xhat = normalized_.channel(n, c);
        sum_dy += dy.template cast<double>().sum();
        sum_dy_xhat += (dy.template cast<double>() * xhat.template cast<double>()).sum();
      }
      gamma_.grad.array()[c] += static_cast<Scalar>(sum_dy_xhat);
      beta_.grad.array()[c] += static_cast<Scalar>(sum_dy);
      const double k = static_cast<double>(gamma_.value.array()[c]) * inv_std_[c] / count;
      for (int n = 0; n < s.n; ++n) {
        const auto dy = grad_out.channel(n, c);
        const auto xhat = normalized_.channel(n, c);
        grad_in.channel(n, c) =
            (k * (count * dy.template cast<double>() - sum_dy - xhat.template cast<double>() * sum_dy_xhat))
                .template cast<Scalar>();
      }
    }
    return grad_in;
  }

  std::vector<Parameter<Scalar>*> parameters() override { return {&gamma_, &beta_}; }
  std::vector<std::pair<std::string, Tensor<Scalar>*>> buffers() override {
    return {{"running_mean", &running_mean_}, {"running_var", &running_var_}};
  }
  std::size_t cached_bytes() const override { return normalized_.bytes(); }
  void clear_cache() override { normalized_ = Tensor<Scalar>(); }
  LayerPtr<Scalar> clone() const override { return std::make_unique<BatchNorm2d>(*this); }

 private:
  int channels_;
  double momentum_;
  double eps_;
  Parameter<Scalar> gamma_;
  Parameter<Scalar> beta_;
  Tensor<Scalar> running_mean_;
  Tensor<Scalar> running_var_;
  Tensor<Scalar> normalized_;
  std::vector<double> inv_std_;
};

}  // namespace keyscope::nn
