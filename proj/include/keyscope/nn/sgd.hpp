#pragma once

#include <vector>

#include "keyscope/nn/tensor.hpp"

namespace keyscope::nn {

struct SgdConfig {
  double learning_rate = 0.01;
  double momentum = 0.9;
};

/// Momentum SGD: v <- momentum * v - lr * g; w <- w + v.
template <typename Scalar>
class Sgd {
 public:
  Sgd(std::vector<Parameter<Scalar>*> params, SgdConfig config) : params_(std::move(params)), config_(config) {
    if (!(config.learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
    if (!(config.momentum >= 0.0 && config.momentum < 1.0)) throw ConfigError("momentum must be in [0, 1)");
    velocity_.reserve(params_.size());
    for (auto* p : params_) velocity_.emplace_back(p->value.shape());
  }

  void step() {
    const auto lr = static_cast<Scalar>(config_.learning_rate);
    const auto mu = static_cast<Scalar>(config_.momentum);
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto& v = velocity_[i].array();
      v = mu * v - lr * params_[i]->grad.array();
      params_[i]->value.array() += v;
    }
  }

  void zero_grad() {
    for (auto* p : params_) p->grad.set_zero();
  }

  double learning_rate() const { return config_.learning_rate; }
  void set_learning_rate(double lr) { config_.learning_rate = lr; }
  const std::vector<Tensor<Scalar>>& velocity() const { return velocity_; }

 private:
  std::vector<Parameter<Scalar>*> params_;
  SgdConfig config_;
  std::vector<Tensor<Scalar>> velocity_;
};

}  // namespace keyscope::nn
