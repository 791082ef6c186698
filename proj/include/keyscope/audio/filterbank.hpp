#pragma once

#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace keyscope::audio {

struct FilterBankConfig {
  double f_min = 65.0;
  double f_max = 2100.0;
  int bins_per_octave = 24;
  int n_fft = 8192;
  int sample_rate = 44100;
};

/// Triangular log-frequency filters over the magnitude bins of a real FFT.
///
/// Center k sits at f_min * 2^(k / bins_per_octave). Filter k rises linearly from
/// center k-1 to a peak of 1 at center k and falls to zero at center k+1 (the outer
/// filters mirror their single neighbour spacing). At low frequencies a filter can be
/// narrower than the FFT bin spacing; such a filter samples the magnitude at its center
/// by linear interpolation between the two surrounding FFT bins, so no row is empty.
struct FilterBank {
  FilterBankConfig config;
  std::vector<double> centers;
  Eigen::SparseMatrix<double, Eigen::RowMajor> weights;  // n_bins x (n_fft/2 + 1)

  int n_bins() const { return static_cast<int>(centers.size()); }
  int n_fft_bins() const { return config.n_fft / 2 + 1; }
};

/// floor(bins_per_octave * log2(f_max / f_min)) + 1, guarded against rounding at exact octaves.
int log_frequency_bin_count(double f_min, double f_max, int bins_per_octave);

FilterBank build_filterbank(const FilterBankConfig& config = {});

}  // namespace keyscope::audio
