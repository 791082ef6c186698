#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "keyscope/audio/spectrogram.hpp"
#include "keyscope/eval/key_label.hpp"
#include "keyscope/nn/rng.hpp"
#include "keyscope/nn/tensor.hpp"

namespace keyscope::training {

/// 20 s at 5 frames per second.
inline constexpr int kSnippetFrames = 100;

/// A spectrogram with its ground-truth key.
struct LabeledPiece {
  std::string id;
  audio::LogFreqSpectrogram spec;
  eval::KeyLabel key;
};

struct Snippet {
  audio::LogFreqSpectrogram spec;
  int start = 0;
};

/// Random contiguous crop of `frames` frames. Shorter pieces are returned
/// left-aligned and zero-padded to `frames`, with start 0.
Snippet sample_snippet(const audio::LogFreqSpectrogram& spec, int frames, nn::RngStream& rng);

struct AugmentConfig {
  bool enabled = true;
  int min_shift = audio::kMinShift;
  int max_shift = audio::kMaxShift;
};

struct Batch {
  nn::Tensor<float> input;  // (N, 1, bins, snippet_frames)
  std::vector<int> targets;
  std::vector<int> shifts;
  std::vector<int> starts;
};

/// Assembles one training batch from `pieces[indices[i]]`. Each item draws a
/// pitch shift and a snippet start from its own stream seeded by
/// (seed, epoch, piece index), so the result does not depend on batch
/// composition or on which thread builds it. The label is transposed with the
/// spectrogram.
Batch make_batch(std::span<const LabeledPiece> pieces, std::span<const std::size_t> indices, int snippet_frames,
                 std::uint64_t seed, std::uint64_t epoch, const AugmentConfig& augment = {});

}  // namespace keyscope::training
