#pragma once

#include <ostream>
#include <span>
#include <vector>

namespace keyscope::eval {

struct DurationItem {
  double duration_s = 0.0;
  bool correct = false;
};

struct GroupStats {
  std::size_t n = 0;
  double median = 0.0;
  double lower_quartile = 0.0;
  double upper_quartile = 0.0;
  double bandwidth = 0.0;
  std::vector<double> density;  // empty when the group has fewer than 2 items
};

/// Length distributions of correctly and incorrectly classified excerpts.
struct DurationStats {
  GroupStats correct;
  GroupStats incorrect;
  std::vector<double> grid;  // seconds, shared by both densities
};

inline constexpr int kDensityGridPoints = 256;

/// Linear-interpolation quantile (R type 7) of an unsorted sample; p in [0, 1].
double quantile(std::vector<double> values, double p);

/// 0.9 * min(sd, IQR / 1.34) * n^(-1/5), falling back to whichever spread is
/// non-zero, then to 1.0 for constant samples.
double silverman_bandwidth(std::span<const double> values);

/// Gaussian KDE evaluated on `grid`, rescaled so the trapezoid integral is 1.
std::vector<double> kernel_density(std::span<const double> values, std::span<const double> grid, double bandwidth);

double trapezoid(std::span<const double> grid, std::span<const double> y);

/// Medians, quartiles and normalised KDE curves per group on a 256-point grid
/// spanning [0, 1.1 * longest duration]. Throws ConfigError for non-positive durations.
DurationStats duration_report(std::span<const DurationItem> items);

/// CSV with columns grid,density_correct,density_incorrect (empty cells for a group without KDE).
void write_duration_csv(std::ostream& out, const DurationStats& stats);

}  // namespace keyscope::eval
