#include "keyscope/eval/duration.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "keyscope/error.hpp"

namespace keyscope::eval {
namespace {

GroupStats summarize(const std::vector<double>& values, std::span<const double> grid) {
  GroupStats g;
  g.n = values.size();
  if (values.empty()) return g;
  g.median = quantile(values, 0.5);
  g.lower_quartile = quantile(values, 0.25);
  g.upper_quartile = quantile(values, 0.75);
  if (values.size() >= 2) {
    g.bandwidth = silverman_bandwidth(values);
    g.density = kernel_density(values, grid, g.bandwidth);
  }
  return g;
}

}  // namespace

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw ConfigError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * std::clamp(p, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double silverman_bandwidth(std::span<const double> values) {
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  const double sd = n > 1 ? std::sqrt(sq / (n - 1.0)) : 0.0;
  const std::vector<double> copy(values.begin(), values.end());
  const double iqr = (quantile(copy, 0.75) - quantile(copy, 0.25)) / 1.34;
  double spread = std::min(sd, iqr);
  if (spread <= 0.0) spread = std::max(sd, iqr);
  if (spread <= 0.0) return 1.0;
  return 0.9 * spread * std::pow(n, -0.2);
}

double trapezoid(std::span<const double> grid, std::span<const double> y) {
  double area = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) area += 0.5 * (y[i] + y[i - 1]) * (grid[i] - grid[i - 1]);
  return area;
}

std::vector<double> kernel_density(std::span<const double> values, std::span<const double> grid, double bandwidth) {
  const double norm = 1.0 / (static_cast<double>(values.size()) * bandwidth * std::sqrt(2.0 * std::numbers::pi));
  std::vector<double> density(grid.size(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double acc = 0.0;
    for (double v : values) {
      const double z = (grid[i] - v) / bandwidth;
      acc += std::exp(-0.5 * z * z);
    }
    density[i] = acc * norm;
  }
  const double area = trapezoid(grid, density);
  if (area > 0.0) {
    for (double& d : density) d /= area;
  }
  return density;
}

DurationStats duration_report(std::span<const DurationItem> items) {
  std::vector<double> correct, incorrect;
  double longest = 0.0;
  for (const auto& item : items) {
    if (!(item.duration_s > 0.0)) throw ConfigError("excerpt durations must be positive");
    (item.correct ? correct : incorrect).push_back(item.duration_s);
    longest = std::max(longest, item.duration_s);
  }
  DurationStats stats;
  stats.grid.resize(kDensityGridPoints);
  const double top = 1.1 * longest;
  for (int i = 0; i < kDensityGridPoints; ++i) stats.grid[i] = top * i / (kDensityGridPoints - 1);
  stats.correct = summarize(correct, stats.grid);
  stats.incorrect = summarize(incorrect, stats.grid);
  return stats;
}

void write_duration_csv(std::ostream& out, const DurationStats& stats) {
  out << "grid,density_correct,density_incorrect\n";
  for (std::size_t i = 0; i < stats.grid.size(); ++i) {
    out << stats.grid[i] << ',';
    if (!stats.correct.density.empty()) out << stats.correct.density[i];
    out << ',';
    if (!stats.incorrect.density.empty()) out << stats.incorrect.density[i];
    out << '\n';
  }
}

}  // namespace keyscope::eval
