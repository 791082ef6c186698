#include "keyscope/training/timing.hpp"

#include <chrono>

#include "keyscope/error.hpp"
#include "keyscope/models/network.hpp"
#include "keyscope/nn/sgd.hpp"
#include "keyscope/training/trainer.hpp"

namespace keyscope::training {
namespace {

struct Measurement {
  double ms_per_update = 0.0;
  std::size_t activation_bytes = 0;
};

Measurement measure(const models::ArchitectureConfig& arch, int frames, const TimingConfig& config) {
  auto model = models::build_model<float>(arch, config.seed);
  nn::Sgd<float> sgd(model.parameters(), {});
  nn::RngStream rng(nn::derive_seed(config.seed, static_cast<std::uint64_t>(frames)));

  Batch batch;
  batch.input = nn::Tensor<float>(nn::Shape{config.batch_size, 1, arch.n_bins, frames});
  for (auto& v : batch.input.array()) v = static_cast<float>(rng.uniform(0.0, 4.0));
  for (int i = 0; i < config.batch_size; ++i) batch.targets.push_back(static_cast<int>(rng.below(24)));

  Measurement m;
  for (int i = 0; i < config.warmup; ++i) train_step(model, sgd, batch);
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < config.updates; ++i) {
    sgd.zero_grad();
    const auto logits = model.forward(batch.input);
    m.activation_bytes = std::max(m.activation_bytes, model.cached_bytes());
    const auto loss = nn::softmax_cross_entropy(logits, std::span<const int>(batch.targets));
    model.backward(loss.grad);
    sgd.step();
    model.clear_cache();
  }
  const auto t1 = std::chrono::steady_clock::now();
  m.ms_per_update = std::chrono::duration<double, std::milli>(t1 - t0).count() / config.updates;
  return m;
}

}  // namespace

TimingReport full_vs_snippet_timing(const models::ArchitectureConfig& model, const TimingConfig& config) {
  if (config.updates < 1 || config.batch_size < 1) throw ConfigError("timing needs >= 1 update and batch size >= 1");
  const auto min = models::minimum_input(model);
  if (config.snippet_frames < min.frames || config.piece_frames < min.frames) {
    throw ConfigError("timing inputs are shorter than the model minimum of " + std::to_string(min.frames) + " frames");
  }
  const Measurement full = measure(model, config.piece_frames, config);
  const Measurement snip = measure(model, config.snippet_frames, config);
  TimingReport r;
  r.full_ms_per_update = full.ms_per_update;
  r.snippet_ms_per_update = snip.ms_per_update;
  r.ratio = snip.ms_per_update / full.ms_per_update;
  r.full_activation_bytes = full.activation_bytes;
  r.snippet_activation_bytes = snip.activation_bytes;
  return r;
}

}  // namespace keyscope::training
