#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "keyscope/models/architecture.hpp"
#include "keyscope/training/trainer.hpp"

namespace keyscope::training {

/// N_f values searched by default for each architecture.
std::vector<int> default_feature_maps(models::ArchKind kind);
/// Dropout probabilities searched by default.
std::vector<double> default_dropouts();

struct GridSearchConfig {
  models::ArchKind kind = models::ArchKind::AllConv;
  std::vector<int> feature_maps;  // empty: default_feature_maps(kind)
  std::vector<double> dropouts;   // empty: default_dropouts()
  std::vector<std::uint64_t> seeds = {0};
  int n_bins = 121;
  TrainConfig train;
  int bootstrap_resamples = 10000;
  std::uint64_t bootstrap_seed = 0;
};

struct GridRow {
  int n_feature_maps = 0;
  double dropout_p = 0.0;
  std::vector<double> scores;  // best validation weighted score per seed
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double mean_overfit_ratio = 0.0;
};

struct ConfidenceInterval {
  double low = 0.0;
  double high = 0.0;
};

/// Percentile bootstrap of the mean; a single sample or a constant sample collapses to a point.
ConfidenceInterval bootstrap_ci(std::span<const double> samples, int resamples, double confidence, std::uint64_t seed);

/// The (N_f, p) grid in row order: N_f outer, p inner.
std::vector<std::pair<int, double>> grid_configs(const GridSearchConfig& config);

/// Trains one model per (N_f, p, seed) and aggregates validation scores.
std::vector<GridRow> grid_search(const GridSearchConfig& config, std::span<const LabeledPiece> train,
                                 std::span<const LabeledPiece> valid);

/// n_feature_maps,dropout,runs,mean_weighted,ci_low,ci_high,mean_overfit_ratio
void write_grid_csv(std::ostream& out, std::span<const GridRow> rows);

}  // namespace keyscope::training
