#pragma once

#include <filesystem>
#include <vector>

namespace keyscope::audio {

inline constexpr int kSampleRate = 44100;

/// Mono audio at 44.1 kHz with amplitudes in [-1, 1].
struct AudioClip {
  std::vector<double> samples;
  int sample_rate = kSampleRate;

  double duration_seconds() const { return static_cast<double>(samples.size()) / sample_rate; }
};

/// Reads a RIFF/WAVE file (16-bit PCM or 32-bit float, mono or stereo, 44.1 kHz).
/// Stereo input is downmixed by the per-sample channel mean. Other sample rates are
/// rejected with "resample unsupported"; nothing is resampled.
AudioClip load_wav(const std::filesystem::path& path);

enum class WavEncoding { Pcm16, Float32 };

/// Writes interleaved samples. `channels` is 1 or 2.
void save_wav(const std::filesystem::path& path, const std::vector<double>& interleaved, int channels,
              int sample_rate = kSampleRate, WavEncoding encoding = WavEncoding::Pcm16);

/// Returns a copy restricted to [offset_s, offset_s + duration_s); duration 0 keeps the rest.
AudioClip slice(const AudioClip& clip, double offset_s, double duration_s);

}  // namespace keyscope::audio
