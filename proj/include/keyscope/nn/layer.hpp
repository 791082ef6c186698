#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "keyscope/nn/rng.hpp"
#include "keyscope/nn/tensor.hpp"

namespace keyscope::nn {

enum class Mode { Train, Infer };

/// One stage of a feed-forward network with a hand-written backward pass.
///
/// `infer` is const and keeps no state, so a frozen layer can serve concurrent
/// callers. `forward` runs in training mode, caches what `backward` needs and
/// may update running statistics. `backward` accumulates into parameter grads
/// and returns the gradient with respect to the input of the last `forward`.
template <typename Scalar>
class Layer {
 public:
  virtual ~Layer() = default;

  /// Architecture token such as "Conv5x5(8)" or "ELU".
  virtual std::string signature() const = 0;
  virtual Shape output_shape(const Shape& in) const = 0;

  virtual Tensor<Scalar> infer(const Tensor<Scalar>& x) const = 0;
  virtual Tensor<Scalar> forward(const Tensor<Scalar>& x, RngStream& rng) = 0;
  virtual Tensor<Scalar> backward(const Tensor<Scalar>& grad_out) = 0;

  Tensor<Scalar> run(const Tensor<Scalar>& x, Mode mode, RngStream& rng) {
    return mode == Mode::Train ? forward(x, rng) : infer(x);
  }

  virtual std::vector<Parameter<Scalar>*> parameters() { return {}; }
  /// Non-trainable state that must survive a checkpoint (batch-norm running stats).
  virtual std::vector<std::pair<std::string, Tensor<Scalar>*>> buffers() { return {}; }
  /// Bytes held for the backward pass after the last `forward`.
  virtual std::size_t cached_bytes() const { return 0; }
  virtual void clear_cache() {}

  virtual std::unique_ptr<Layer> clone() const = 0;

  std::size_t parameter_count() {
    std::size_t total = 0;
    for (auto* p : parameters()) total += p->count();
    return total;
  }
};

template <typename Scalar>
using LayerPtr = std::unique_ptr<Layer<Scalar>>;

}  // namespace keyscope::nn
