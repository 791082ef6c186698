#include "keyscope/training/snippet.hpp"

#include "keyscope/error.hpp"

namespace keyscope::training {

Snippet sample_snippet(const audio::LogFreqSpectrogram& spec, int frames, nn::RngStream& rng) {
  if (frames < 1) throw ConfigError("snippet length must be >= 1 frame");
  Snippet out;
  out.spec.frame_rate = spec.frame_rate;
  if (spec.frames() >= frames) {
    out.start = rng.between(0, spec.frames() - frames);
    out.spec.values = spec.values.middleRows(out.start, frames);
  } else {
    out.spec.values = audio::SpectrogramMatrix::Zero(frames, spec.bins());
    out.spec.values.topRows(spec.frames()) = spec.values;
  }
  return out;
}

Batch make_batch(std::span<const LabeledPiece> pieces, std::span<const std::size_t> indices, int snippet_frames,
                 std::uint64_t seed, std::uint64_t epoch, const AugmentConfig& augment) {
  if (indices.empty()) throw ConfigError("cannot build an empty batch");
  if (augment.enabled && (augment.min_shift < audio::kMinShift || augment.max_shift > audio::kMaxShift ||
                          augment.min_shift > augment.max_shift)) {
    throw ConfigError("augmentation range must lie within [-4, +7]");
  }
  const int bins = pieces[indices[0]].spec.bins();
  Batch batch;
  batch.input = nn::Tensor<float>(nn::Shape{static_cast<int>(indices.size()), 1, bins, snippet_frames});
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const std::size_t idx = indices[i];
    const LabeledPiece& piece = pieces[idx];
    if (piece.spec.bins() != bins) throw DataError("piece '" + piece.id + "' has a different bin count");
    nn::RngStream rng(nn::derive_seed(seed, epoch, idx));
    const int shift = augment.enabled ? rng.between(augment.min_shift, augment.max_shift) : 0;
    const auto shifted = shift == 0 ? piece.spec : audio::shift_pitch(piece.spec, shift);
    const Snippet snip = sample_snippet(shifted, snippet_frames, rng);
    nn::RowMatrixMap<float>(batch.input.data() + i * batch.input.per_sample(), bins, snippet_frames) =
        snip.spec.values.transpose();
    batch.targets.push_back(eval::transpose(piece.key, shift).index());
    batch.shifts.push_back(shift);
    batch.starts.push_back(snip.start);
  }
  return batch;
}

}  // namespace keyscope::training
