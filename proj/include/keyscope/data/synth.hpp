#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "keyscope/audio/filterbank.hpp"
#include "keyscope/audio/wav.hpp"
#include "keyscope/data/manifest.hpp"
#include "keyscope/eval/key_label.hpp"
#include "keyscope/training/snippet.hpp"

namespace keyscope::data {

/// A cadence I-IV-V-I (major) or i-iv-v-i (natural minor), each chord a sum of
/// harmonic partials for a bass note and two voiced triads. Detuning, amplitude
/// jitter and a low noise floor come from `seed`; the draws do not depend on
/// the key, so rendering the same seed in a transposed key transposes the audio.
audio::AudioClip synthesize_piece(const eval::KeyLabel& key, std::uint64_t seed, double duration_s = 24.0);

struct SynthItem {
  std::string id;
  eval::KeyLabel key;
  std::uint64_t seed = 0;
};

/// Keys cycle through all 24 classes in index order, so any multiple of 24
/// pieces is balanced.
std::vector<SynthItem> plan_synth_dataset(int n_pieces, std::uint64_t seed);

struct SynthDataset {
  std::vector<ManifestEntry> manifest;
  std::vector<training::LabeledPiece> pieces;
};

struct SynthOptions {
  double duration_s = 24.0;
  int workers = 1;
  std::string dataset = "synthetic";
  /// Train / valid / test share of the generated manifest.
  std::array<double, 3> split_ratios = {0.8, 0.2, 0.0};
};

/// Renders every planned piece through the real frontend. With a non-empty
/// `out_dir`, writes <id>.kspc caches and manifest.csv there.
SynthDataset synth_dataset(int n_pieces, std::uint64_t seed, const std::filesystem::path& out_dir = {},
                           const SynthOptions& options = {});

}  // namespace keyscope::data
