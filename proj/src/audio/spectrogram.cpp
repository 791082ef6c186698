#include "keyscope/audio/spectrogram.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "keyscope/error.hpp"
#include "keyscope/util/binary_io.hpp"

namespace keyscope::audio {

std::int64_t frame_count(std::int64_t n_samples, int frame_size, int hop) {
  if (n_samples < frame_size) return 0;
  return (n_samples - frame_size) / hop + 1;
}

LogFreqSpectrogram compute_spectrogram(const AudioClip& clip, const FilterBank& fb) {
  const int n_fft = fb.config.n_fft;
  const int hop = static_cast<int>(std::lround(fb.config.sample_rate / kFrameRate));
  const auto n_frames = frame_count(static_cast<std::int64_t>(clip.samples.size()), n_fft, hop);
  if (n_frames < 1) {
    throw TooShortError("audio too short: " + std::to_string(clip.samples.size()) + " samples, need at least " +
                        std::to_string(n_fft) + " (one frame)");
  }

  std::vector<double> window(n_fft);
  for (int i = 0; i < n_fft; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n_fft);
  }

  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<double> frame(n_fft);
  std::vector<std::complex<double>> spectrum;
  Eigen::VectorXd magnitude(fb.n_fft_bins());

  LogFreqSpectrogram out;
  out.values.resize(n_frames, fb.n_bins());
  for (std::int64_t t = 0; t < n_frames; ++t) {
    const double* src = clip.samples.data() + t * hop;
    for (int i = 0; i < n_fft; ++i) frame[i] = src[i] * window[i];
    fft.fwd(spectrum, frame);
    for (int j = 0; j < fb.n_fft_bins(); ++j) magnitude[j] = std::abs(spectrum[j]);
    const Eigen::VectorXd projected = fb.weights * magnitude;
    out.values.row(t) = projected.array().log1p().cast<float>().transpose();
  }
  return out;
}

LogFreqSpectrogram shift_pitch(const LogFreqSpectrogram& spec, int semitones) {
  if (semitones < kMinShift || semitones > kMaxShift) {
    throw RangeError("pitch shift " + std::to_string(semitones) + " outside [" + std::to_string(kMinShift) + ", +" +
                     std::to_string(kMaxShift) + "] semitones");
  }
  const int offset = 2 * semitones;
  const int n_bins = spec.bins();
  if (std::abs(offset) >= n_bins) {
    throw RangeError("pitch shift of " + std::to_string(offset) + " bins exceeds spectrogram width");
  }
  LogFreqSpectrogram out;
  out.frame_rate = spec.frame_rate;
  out.values = SpectrogramMatrix::Zero(spec.frames(), n_bins);
  const int width = n_bins - std::abs(offset);
  if (offset >= 0) {
    out.values.rightCols(width) = spec.values.leftCols(width);
  } else {
    out.values.leftCols(width) = spec.values.rightCols(width);
  }
  return out;
}

std::uint64_t frontend_hash(const FilterBankConfig& config) {
  std::ostringstream s;
  s.precision(17);
  s << "hann;log1p;fps=" << kFrameRate << ";f_min=" << config.f_min << ";f_max=" << config.f_max
    << ";bpo=" << config.bins_per_octave << ";n_fft=" << config.n_fft << ";sr=" << config.sample_rate;
  return io::fnv1a64(s.str());
}

}  // namespace keyscope::audio
