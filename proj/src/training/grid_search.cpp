#include "keyscope/training/grid_search.hpp"

#include <algorithm>
#include <iomanip>
#include <numeric>
#include <ostream>

#include "keyscope/error.hpp"
#include "keyscope/eval/duration.hpp"

namespace keyscope::training {

std::vector<int> default_feature_maps(models::ArchKind kind) {
  if (kind == models::ArchKind::AllConv) return {2, 4, 8, 12, 16, 20, 24};
  return {8, 16, 24, 32, 40};
}

std::vector<double> default_dropouts() { return {0.0, 0.1, 0.2}; }

ConfidenceInterval bootstrap_ci(std::span<const double> samples, int resamples, double confidence,
                                std::uint64_t seed) {
  if (samples.empty()) throw ConfigError("bootstrap needs at least one sample");
  if (resamples < 1) throw ConfigError("bootstrap needs at least one resample");
  if (std::all_of(samples.begin(), samples.end(), [&](double v) { return v == samples[0]; })) {
    return {samples[0], samples[0]};
  }
  nn::RngStream rng(seed);
  std::vector<double> means(static_cast<std::size_t>(resamples));
  for (auto& m : means) {
    double sum = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) sum += samples[rng.below(samples.size())];
    m = sum / static_cast<double>(samples.size());
  }
  const double alpha = (1.0 - confidence) / 2.0;
  return {eval::quantile(means, alpha), eval::quantile(means, 1.0 - alpha)};
}

std::vector<std::pair<int, double>> grid_configs(const GridSearchConfig& config) {
  const auto nfs = config.feature_maps.empty() ? default_feature_maps(config.kind) : config.feature_maps;
  const auto ps = config.dropouts.empty() ? default_dropouts() : config.dropouts;
  std::vector<std::pair<int, double>> out;
  for (int nf : nfs) {
    for (double p : ps) out.emplace_back(nf, p);
  }
  return out;
}

std::vector<GridRow> grid_search(const GridSearchConfig& config, std::span<const LabeledPiece> train,
                                 std::span<const LabeledPiece> valid) {
  if (config.seeds.empty()) throw ConfigError("grid search needs at least one seed");
  std::vector<GridRow> rows;
  for (const auto& [nf, p] : grid_configs(config)) {
    GridRow row;
    row.n_feature_maps = nf;
    row.dropout_p = p;
    double overfit = 0.0;
    for (std::uint64_t seed : config.seeds) {
      models::ArchitectureConfig arch;
      arch.kind = config.kind;
      arch.n_feature_maps = nf;
      arch.dropout_p = p;
      arch.n_bins = config.n_bins;
      TrainConfig tc = config.train;
      tc.seed = seed;
      const auto result = fit(models::build_model<float>(arch, seed), train, valid, tc);
      row.scores.push_back(result.report.best_val_weighted);
      overfit += result.report.overfit_ratio;
    }
    row.mean = std::accumulate(row.scores.begin(), row.scores.end(), 0.0) / static_cast<double>(row.scores.size());
    const auto ci = bootstrap_ci(row.scores, config.bootstrap_resamples, 0.95, config.bootstrap_seed);
    row.ci_low = ci.low;
    row.ci_high = ci.high;
    row.mean_overfit_ratio = overfit / static_cast<double>(row.scores.size());
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_grid_csv(std::ostream& out, std::span<const GridRow> rows) {
  out << "n_feature_maps,dropout,runs,mean_weighted,ci_low,ci_high,mean_overfit_ratio\n";
  out << std::setprecision(9);
  for (const auto& r : rows) {
    out << r.n_feature_maps << ',' << r.dropout_p << ',' << r.scores.size() << ',' << r.mean << ',' << r.ci_low << ','
        << r.ci_high << ',' << r.mean_overfit_ratio << '\n';
  }
}

}  // namespace keyscope::training
