#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "keyscope/audio/spectrogram.hpp"
#include "keyscope/eval/key_label.hpp"
#include "keyscope/models/architecture.hpp"
#include "keyscope/nn/activation.hpp"
#include "keyscope/nn/batchnorm.hpp"
#include "keyscope/nn/conv2d.hpp"
#include "keyscope/nn/dense.hpp"
#include "keyscope/nn/dropout.hpp"
#include "keyscope/nn/loss.hpp"
#include "keyscope/nn/pooling.hpp"

namespace keyscope::models {

/// Sequential stack of layers producing (N, 24, 1, 1) logits.
template <typename Scalar>
class Network {
 public:
  using TensorT = nn::Tensor<Scalar>;

  struct NamedTensor {
    std::string name;
    TensorT* tensor;
  };

  explicit Network(ArchitectureConfig config, std::uint64_t seed = 0) : config_(config), rng_(seed) {}

  Network(const Network& other) : config_(other.config_), rng_(other.rng_) {
    layers_.reserve(other.layers_.size());
    for (const auto& l : other.layers_) layers_.push_back(l->clone());
  }
  Network& operator=(const Network& other) {
    if (this != &other) {
      Network copy(other);
      *this = std::move(copy);
    }
    return *this;
  }
  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;

  const ArchitectureConfig& config() const { return config_; }
  nn::RngStream& rng() { return rng_; }
  void reseed(std::uint64_t seed) { rng_ = nn::RngStream(seed); }

  void add(nn::LayerPtr<Scalar> layer) { layers_.push_back(std::move(layer)); }
  std::size_t size() const { return layers_.size(); }
  nn::Layer<Scalar>& layer(std::size_t i) { return *layers_[i]; }
  const nn::Layer<Scalar>& layer(std::size_t i) const { return *layers_[i]; }

  /// Throws TooShortError or ShapeError naming the accepted extents.
  void check_input(const nn::Shape& s) const {
    const MinimumInput min = minimum_input(config_);
    if (s.c != 1) throw ShapeError("network input must have 1 channel, got " + s.str());
    if (s.w < min.frames || s.h < min.bins) {
      throw TooShortError("input of " + std::to_string(s.w) + " frames x " + std::to_string(s.h) +
                          " bins is below the minimum of " + std::to_string(min.frames) + " frames x " +
                          std::to_string(min.bins) + " bins for " + arch_name(config_.kind));
    }
    if (config_.kind == ArchKind::KeyNet && s.h != config_.n_bins) {
      throw ShapeError("keynet was built for " + std::to_string(config_.n_bins) + " bins, got " + std::to_string(s.h));
    }
  }

  TensorT infer(const TensorT& x) const {
    check_input(x.shape());
    TensorT h = x;
    for (const auto& l : layers_) h = l->infer(h);
    return h;
  }

  /// Training-mode forward pass; caches activations for `backward`.
  TensorT forward(const TensorT& x) {
    check_input(x.shape());
    TensorT h = x;
    peak_cached_bytes_ = 0;
    for (auto& l : layers_) {
      h = l->forward(h, rng_);
      peak_cached_bytes_ += l->cached_bytes();
    }
    return h;
  }

  TensorT run(const TensorT& x, nn::Mode mode) { return mode == nn::Mode::Train ? forward(x) : infer(x); }

  TensorT backward(const TensorT& grad_out) {
    TensorT g = grad_out;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
    return g;
  }

  std::vector<nn::Parameter<Scalar>*> parameters() {
    std::vector<nn::Parameter<Scalar>*> out;
    for (auto& l : layers_) {
      for (auto* p : l->parameters()) out.push_back(p);
    }
    return out;
  }

  /// Parameters and buffers keyed "<layer index>.<name>", in layer order.
  std::vector<NamedTensor> named_tensors() {
    std::vector<NamedTensor> out;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      const std::string prefix = std::to_string(i) + ".";
      for (auto* p : layers_[i]->parameters()) out.push_back({prefix + p->name, &p->value});
      for (auto& [name, t] : layers_[i]->buffers()) out.push_back({prefix + name, t});
    }
    return out;
  }

  struct ConstNamedTensor {
    std::string name;
    const TensorT* tensor;
  };

  std::vector<ConstNamedTensor> named_tensors() const {
    std::vector<ConstNamedTensor> out;
    for (auto& t : const_cast<Network*>(this)->named_tensors()) out.push_back({t.name, t.tensor});
    return out;
  }

  void zero_grad() {
    for (auto* p : parameters()) p->grad.set_zero();
  }

  /// Space-separated layer tokens followed by the output "Softmax".
  std::string signature() const {
    std::string s;
    for (const auto& l : layers_) s += l->signature() + " ";
    return s + "Softmax";
  }

  /// Bytes of activations held for back-propagation after the last `forward`.
  std::size_t cached_bytes() const { return peak_cached_bytes_; }
  void clear_cache() {
    for (auto& l : layers_) l->clear_cache();
    peak_cached_bytes_ = 0;
  }

 private:
  ArchitectureConfig config_;
  nn::RngStream rng_;
  std::vector<nn::LayerPtr<Scalar>> layers_;
  std::size_t peak_cached_bytes_ = 0;
};

using Model = Network<float>;

namespace detail {

template <typename Scalar>
void add_conv_block(Network<Scalar>& net, nn::RngStream& init, int in, int out, int kernel, bool activation) {
  auto conv = std::make_unique<nn::Conv2d<Scalar>>(in, out, kernel);
  conv->init(init);
  net.add(std::move(conv));
  net.add(std::make_unique<nn::BatchNorm2d<Scalar>>(out));
  if (activation) net.add(std::make_unique<nn::Elu<Scalar>>());
}

template <typename Scalar>
void add_dropout(Network<Scalar>& net, double p) {
  net.add(std::make_unique<nn::SpatialDropout<Scalar>>(p));
}

}  // namespace detail

/// Five [Conv5x5(N_f)-BN-ELU-Dropout] blocks, a frame-wise dense embedding of
/// width 2 N_f with ELU, averaging over time, and a dense 24-way classifier.
template <typename Scalar = float>
Network<Scalar> build_keynet(const ArchitectureConfig& config, std::uint64_t seed = 0) {
  config.validate();
  if (config.kind != ArchKind::KeyNet) throw ConfigError("build_keynet needs kind = keynet");
  Network<Scalar> net(config, seed);
  nn::RngStream init(nn::derive_seed(seed, 0x1417));
  const int nf = config.n_feature_maps;
  for (int i = 0; i < 5; ++i) {
    detail::add_conv_block(net, init, i == 0 ? 1 : nf, nf, 5, true);
    detail::add_dropout(net, config.dropout_p);
  }
  auto embed = std::make_unique<nn::Dense<Scalar>>(nf * config.n_bins, config.effective_embedding_dim());
  embed->init(init);
  net.add(std::move(embed));
  net.add(std::make_unique<nn::Elu<Scalar>>());
  net.add(std::make_unique<nn::TimeAvgPool<Scalar>>());
  auto classifier = std::make_unique<nn::Dense<Scalar>>(config.effective_embedding_dim(), config.n_classes);
  classifier->init(init);
  net.add(std::move(classifier));
  return net;
}

/// All-convolutional classifier: three pooled conv pairs (N_f, 2 N_f, 4 N_f maps),
/// two 3x3 convs with 8 N_f maps, a 1x1 conv to 24 maps and global average pooling.
/// The final 1x1 conv has batch normalisation but no ELU.
template <typename Scalar = float>
Network<Scalar> build_allconv(const ArchitectureConfig& config, std::uint64_t seed = 0) {
  config.validate();
  if (config.kind != ArchKind::AllConv) throw ConfigError("build_allconv needs kind = allconv");
  Network<Scalar> net(config, seed);
  nn::RngStream init(nn::derive_seed(seed, 0xA11C));
  const int nf = config.n_feature_maps;
  const double p = config.dropout_p;

  detail::add_conv_block(net, init, 1, nf, 5, true);
  detail::add_conv_block(net, init, nf, nf, 3, true);
  net.add(std::make_unique<nn::MaxPool2x2<Scalar>>());
  detail::add_dropout(net, p);

  detail::add_conv_block(net, init, nf, 2 * nf, 3, true);
  detail::add_conv_block(net, init, 2 * nf, 2 * nf, 3, true);
  net.add(std::make_unique<nn::MaxPool2x2<Scalar>>());
  detail::add_dropout(net, p);

  detail::add_conv_block(net, init, 2 * nf, 4 * nf, 3, true);
  detail::add_conv_block(net, init, 4 * nf, 4 * nf, 3, true);
  net.add(std::make_unique<nn::MaxPool2x2<Scalar>>());
  detail::add_dropout(net, p);

  detail::add_conv_block(net, init, 4 * nf, 8 * nf, 3, true);
  detail::add_dropout(net, p);
  detail::add_conv_block(net, init, 8 * nf, 8 * nf, 3, true);
  detail::add_dropout(net, p);

  detail::add_conv_block(net, init, 8 * nf, config.n_classes, 1, false);
  net.add(std::make_unique<nn::GlobalAvgPool<Scalar>>());
  return net;
}

template <typename Scalar = float>
Network<Scalar> build_model(const ArchitectureConfig& config, std::uint64_t seed = 0) {
  return config.kind == ArchKind::KeyNet ? build_keynet<Scalar>(config, seed) : build_allconv<Scalar>(config, seed);
}

struct LayerParamCount {
  std::size_t index = 0;
  std::string signature;
  std::size_t count = 0;
};

struct ParamReport {
  std::vector<LayerParamCount> layers;  // only layers with trainable parameters
  std::size_t total = 0;
  std::size_t dense_projection = 0;  // KeyNet's frame-wise embedding layer
  double dense_share = 0.0;
};

/// Exact trainable-parameter counts; batch-norm scale and shift are included.
template <typename Scalar>
ParamReport count_params(Network<Scalar>& net) {
  ParamReport r;
  bool seen_dense = false;
  for (std::size_t i = 0; i < net.size(); ++i) {
    const std::size_t c = net.layer(i).parameter_count();
    if (c == 0) continue;
    r.layers.push_back({i, net.layer(i).signature(), c});
    r.total += c;
    if (!seen_dense && dynamic_cast<nn::Dense<Scalar>*>(&net.layer(i)) != nullptr) {
      seen_dense = true;
      r.dense_projection = c;
    }
  }
  // A KeyNet's only other dense layer is the classifier; AllConv has none.
  if (net.config().kind != ArchKind::KeyNet) r.dense_projection = 0;
  r.dense_share = r.total > 0 ? static_cast<double>(r.dense_projection) / static_cast<double>(r.total) : 0.0;
  return r;
}

/// (1, 1, bins, frames) tensor from a frames x bins spectrogram.
template <typename Scalar = float>
nn::Tensor<Scalar> to_tensor(const audio::LogFreqSpectrogram& spec) {
  nn::Tensor<Scalar> t(nn::Shape{1, 1, spec.bins(), spec.frames()});
  nn::RowMatrixMap<Scalar>(t.data(), spec.bins(), spec.frames()) = spec.values.transpose().template cast<Scalar>();
  return t;
}

/// Stacks equally sized spectrograms into an (N, 1, bins, frames) batch.
template <typename Scalar = float>
nn::Tensor<Scalar> stack(std::span<const audio::LogFreqSpectrogram> specs) {
  if (specs.empty()) throw ShapeError("cannot stack an empty batch");
  const int bins = specs[0].bins();
  const int frames = specs[0].frames();
  nn::Tensor<Scalar> t(nn::Shape{static_cast<int>(specs.size()), 1, bins, frames});
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (specs[i].bins() != bins || specs[i].frames() != frames) {
      throw ShapeError("batch items must share extents");
    }
    nn::RowMatrixMap<Scalar>(t.data() + i * t.per_sample(), bins, frames) =
        specs[i].values.transpose().template cast<Scalar>();
  }
  return t;
}

struct Prediction {
  std::array<double, eval::kNumKeys> distribution{};
  int index = 0;
  eval::KeyLabel key;
};

namespace detail {

inline Prediction to_prediction(std::span<const double> logits) {
  Prediction p;
  const auto probs = nn::softmax<double>(logits);
  std::copy(probs.begin(), probs.end(), p.distribution.begin());
  p.index = static_cast<int>(std::max_element(p.distribution.begin(), p.distribution.end()) - p.distribution.begin());
  p.key = eval::KeyLabel::from_index(p.index);
  return p;
}

}  // namespace detail

/// Class distributions for a batch, computed in inference mode.
template <typename Scalar>
std::vector<Prediction> predict_batch(const Network<Scalar>& net, const nn::Tensor<Scalar>& batch) {
  const nn::Tensor<Scalar> logits = net.infer(batch);
  std::vector<Prediction> out;
  for (int n = 0; n < logits.shape().n; ++n) {
    std::array<double, eval::kNumKeys> row{};
    for (int k = 0; k < eval::kNumKeys; ++k) row[static_cast<std::size_t>(k)] = logits(n, k, 0, 0);
    out.push_back(detail::to_prediction(row));
  }
  return out;
}

/// Whole-piece inference.
template <typename Scalar>
Prediction predict(const Network<Scalar>& net, const audio::LogFreqSpectrogram& spec) {
  return predict_batch(net, to_tensor<Scalar>(spec)).front();
}

}  // namespace keyscope::models
