#include "keyscope/audio/filterbank.hpp"

#include <cmath>
#include <string>

#include "keyscope/error.hpp"

namespace keyscope::audio {

int log_frequency_bin_count(double f_min, double f_max, int bins_per_octave) {
  const double span = bins_per_octave * std::log2(f_max / f_min);
  return static_cast<int>(std::floor(span + 1e-9)) + 1;
}

FilterBank build_filterbank(const FilterBankConfig& config) {
  const double nyquist = config.sample_rate / 2.0;
  if (!(config.f_min > 0.0 && config.f_min < config.f_max && config.f_max < nyquist)) {
    throw ConfigError("filterbank requires 0 < f_min < f_max < sample_rate/2 (got f_min=" +
                      std::to_string(config.f_min) + ", f_max=" + std::to_string(config.f_max) + ")");
  }
  if (config.bins_per_octave < 1 || config.n_fft < 2 || config.n_fft % 2 != 0) {
    throw ConfigError("filterbank requires bins_per_octave >= 1 and an even n_fft");
  }

  FilterBank fb;
  fb.config = config;
  const int n_bins = log_frequency_bin_count(config.f_min, config.f_max, config.bins_per_octave);
  fb.centers.resize(n_bins);
  for (int k = 0; k < n_bins; ++k) {
    fb.centers[k] = config.f_min * std::exp2(static_cast<double>(k) / config.bins_per_octave);
  }

  const double ratio = std::exp2(1.0 / config.bins_per_octave);
  const double df = static_cast<double>(config.sample_rate) / config.n_fft;
  const int n_fft_bins = config.n_fft / 2 + 1;

  std::vector<Eigen::Triplet<double>> triplets;
  for (int k = 0; k < n_bins; ++k) {
    const double center = fb.centers[k];
    const double lower = k > 0 ? fb.centers[k - 1] : center / ratio;
    const double upper = k + 1 < n_bins ? fb.centers[k + 1] : center * ratio;

    bool any = false;
    const int j_lo = static_cast<int>(std::floor(lower / df));
    const int j_hi = std::min(n_fft_bins - 1, static_cast<int>(std::ceil(upper / df)));
    for (int j = std::max(j_lo, 0); j <= j_hi; ++j) {
      const double f = j * df;
      double w = 0.0;
      if (f > lower && f <= center) {
        w = (f - lower) / (center - lower);
      } else if (f > center && f < upper) {
        w = (upper - f) / (upper - center);
      }
      if (w > 0.0) {
        triplets.emplace_back(k, j, w);
        any = true;
      }
    }
    if (!any) {
      const double pos = center / df;
      const int j0 = static_cast<int>(std::floor(pos));
      const double frac = pos - j0;
      triplets.emplace_back(k, j0, 1.0 - frac);
      if (frac > 0.0 && j0 + 1 < n_fft_bins) triplets.emplace_back(k, j0 + 1, frac);
    }
  }
  fb.weights.resize(n_bins, n_fft_bins);
  fb.weights.setFromTriplets(triplets.begin(), triplets.end());
  fb.weights.makeCompressed();
  return fb;
}

}  // namespace keyscope::audio
