#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "keyscope/audio/filterbank.hpp"
#include "keyscope/audio/wav.hpp"

namespace keyscope::audio {

inline constexpr double kFrameRate = 5.0;
inline constexpr int kHopSize = 8820;  // 44100 / 5

using SpectrogramMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Frames x bins matrix of log(1 + magnitude) values.
struct LogFreqSpectrogram {
  SpectrogramMatrix values;
  double frame_rate = kFrameRate;

  int frames() const { return static_cast<int>(values.rows()); }
  int bins() const { return static_cast<int>(values.cols()); }
};

/// floor((n - frame_size) / hop) + 1, or 0 if fewer than frame_size samples.
std::int64_t frame_count(std::int64_t n_samples, int frame_size = 8192, int hop = kHopSize);

/// Hann-windowed magnitude FFT per frame, projected by the filterbank, then log(1 + x).
/// Throws TooShortError for clips shorter than one frame.
LogFreqSpectrogram compute_spectrogram(const AudioClip& clip, const FilterBank& fb);

/// Translates the spectrogram by 2 * semitones bins along frequency with zero fill.
/// Upward shifts move content to higher bins. Throws RangeError outside [-4, +7].
LogFreqSpectrogram shift_pitch(const LogFreqSpectrogram& spec, int semitones);

inline constexpr int kMinShift = -4;
inline constexpr int kMaxShift = 7;

/// Stable digest of the frontend parameters, stored alongside cached spectrograms.
std::uint64_t frontend_hash(const FilterBankConfig& config);

}  // namespace keyscope::audio
