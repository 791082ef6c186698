#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "keyscope/nn/tensor.hpp"

namespace keyscope::nn {

inline constexpr int kNumClasses = 24;

/// Numerically stable softmax (max subtracted before exponentiation).
template <typename Scalar>
std::vector<Scalar> softmax(std::span<const Scalar> logits) {
  double peak = logits.empty() ? 0.0 : static_cast<double>(logits[0]);
  for (Scalar v : logits) peak = std::max(peak, static_cast<double>(v));
  std::vector<double> e(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    e[i] = std::exp(static_cast<double>(logits[i]) - peak);
    total += e[i];
  }
  std::vector<Scalar> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = static_cast<Scalar>(e[i] / total);
  return out;
}

template <typename Scalar>
struct LossResult {
  double loss = 0.0;
  Tensor<Scalar> grad;
};

/// Mean categorical cross-entropy over a batch of (N, 24, 1, 1) logits.
/// The gradient is (softmax - onehot) / N, so it matches the mean loss.
template <typename Scalar>
LossResult<Scalar> softmax_cross_entropy(const Tensor<Scalar>& logits, std::span<const int> targets) {
  const Shape& s = logits.shape();
  if (s.c != kNumClasses || s.h != 1 || s.w != 1) {
    throw ShapeError("softmax cross-entropy expects (N, 24, 1, 1) logits, got " + s.str());
  }
  if (targets.size() != static_cast<std::size_t>(s.n)) {
    throw ShapeError("got " + std::to_string(targets.size()) + " targets for a batch of " + std::to_string(s.n));
  }
  LossResult<Scalar> out{0.0, Tensor<Scalar>(s)};
  for (int n = 0; n < s.n; ++n) {
    const int t = targets[static_cast<std::size_t>(n)];
    if (t < 0 || t >= kNumClasses) throw IndexError("target class " + std::to_string(t) + " outside 0..23");
    const std::span<const Scalar> row(logits.data() + static_cast<std::size_t>(n) * kNumClasses, kNumClasses);
    double peak = row[0];
    for (Scalar v : row) peak = std::max(peak, static_cast<double>(v));
    double total = 0.0;
    for (Scalar v : row) total += std::exp(static_cast<double>(v) - peak);
    const double log_z = peak + std::log(total);
    out.loss += log_z - static_cast<double>(row[static_cast<std::size_t>(t)]);
    for (int k = 0; k < kNumClasses; ++k) {
      const double p = std::exp(static_cast<double>(row[static_cast<std::size_t>(k)]) - log_z);
      out.grad(n, k, 0, 0) = static_cast<Scalar>((p - (k == t ? 1.0 : 0.0)) / s.n);
    }
  }
  out.loss /= s.n;
  return out;
}

}  // namespace keyscope::nn
