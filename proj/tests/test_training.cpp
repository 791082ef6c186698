#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <set>
#include <sstream>

#include "keyscope/data/synth.hpp"
#include "keyscope/error.hpp"
#include "keyscope/training/grid_search.hpp"
#include "keyscope/training/snippet.hpp"
#include "keyscope/training/timing.hpp"
#include "keyscope/training/trainer.hpp"

using namespace keyscope;
using namespace keyscope::training;

namespace {

audio::LogFreqSpectrogram ramp(int frames, int bins = 121) {
  audio::LogFreqSpectrogram s;
  s.values.resize(frames, bins);
  for (int t = 0; t < frames; ++t)
    for (int b = 0; b < bins; ++b) s.values(t, b) = static_cast<float>(t * 1000 + b + 1);
  return s;
}

// Small synthetic train/valid sets shared by the fit tests.
struct TinyData {
  std::vector<LabeledPiece> train, valid;
  TinyData() {
    data::SynthOptions opt;
    opt.duration_s = 6.0;
    train = data::synth_dataset(24, 1, {}, opt).pieces;
    valid = data::synth_dataset(24, 2, {}, opt).pieces;
    for (auto& p : valid) p.id = "valid_" + p.id;
  }
};

const TinyData& tiny() {
  static const TinyData d;
  return d;
}

TrainConfig quick_config() {
  TrainConfig tc;
  tc.batch_size = 8;
  tc.max_epochs = 3;
  tc.snippet_frames = 16;
  tc.seed = 11;
  return tc;
}

models::ArchitectureConfig small_allconv() {
  models::ArchitectureConfig c;
  c.kind = models::ArchKind::AllConv;
  c.n_feature_maps = 2;
  return c;
}

}  // namespace

TEST(Snippet, LongPiecesGiveContiguousSlices) {
  const auto spec = ramp(600);
  nn::RngStream rng(1);
  for (int i = 0; i < 200; ++i) {
    const auto s = sample_snippet(spec, 100, rng);
    ASSERT_EQ(s.spec.frames(), 100);
    ASSERT_GE(s.start, 0);
    ASSERT_LE(s.start, 500);
    EXPECT_TRUE((s.spec.values.array() == spec.values.middleRows(s.start, 100).array()).all());
  }
}

TEST(Snippet, ExactAndShortPieces) {
  nn::RngStream rng(1);
  const auto exact = sample_snippet(ramp(100), 100, rng);
  EXPECT_EQ(exact.start, 0);
  EXPECT_TRUE((exact.spec.values.array() == ramp(100).values.array()).all());
  const auto padded = sample_snippet(ramp(40), 100, rng);
  EXPECT_EQ(padded.spec.frames(), 100);
  EXPECT_TRUE((padded.spec.values.topRows(40).array() == ramp(40).values.array()).all());
  EXPECT_TRUE((padded.spec.values.bottomRows(60).array() == 0.0f).all());
}

TEST(Snippet, StartsAreUniform) {
  const auto spec = ramp(600, 4);
  nn::RngStream rng(2024);
  std::vector<int> counts(501, 0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) ++counts[static_cast<std::size_t>(sample_snippet(spec, 100, rng).start)];
  const double expected = static_cast<double>(draws) / 501;
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // Wilson-Hilferty approximation of the 0.999 quantile with 500 degrees of freedom.
  const double df = 500, z = 3.090232;
  const double critical = df * std::pow(1 - 2 / (9 * df) + z * std::sqrt(2 / (9 * df)), 3);
  EXPECT_LT(chi2, critical);
}

TEST(MakeBatch, ShiftTransposesTheLabel) {
  std::vector<LabeledPiece> pieces = {{"a", ramp(120), eval::parse_key_label("C major")}};
  const std::vector<std::size_t> idx = {0};
  AugmentConfig up7{true, 7, 7};
  const auto b = make_batch(pieces, idx, 100, 1, 1, up7);
  EXPECT_EQ(b.targets[0], eval::parse_key_label("G major").index());
  EXPECT_EQ(b.shifts[0], 7);
  EXPECT_EQ(b.input(0, 0, 13, 0), 0.0f);  // zero fill below the shifted content
  EXPECT_EQ(b.input(0, 0, 14, 0), pieces[0].spec.values(b.starts[0], 0));
}

TEST(MakeBatch, UnshiftedFullPieceEqualsTheCache) {
  std::vector<LabeledPiece> pieces = {{"a", ramp(100), eval::parse_key_label("A minor")}};
  const std::vector<std::size_t> idx = {0};
  const auto b = make_batch(pieces, idx, 100, 3, 1, AugmentConfig{false});
  EXPECT_EQ(b.targets[0], pieces[0].key.index());
  for (int t = 0; t < 100; ++t)
    for (int f = 0; f < 121; ++f) ASSERT_EQ(b.input(0, 0, f, t), pieces[0].spec.values(t, f));
}

TEST(MakeBatch, DeterministicAndIndependentOfComposition) {
  std::vector<LabeledPiece> pieces;
  for (int i = 0; i < 6; ++i) pieces.push_back({"p" + std::to_string(i), ramp(150 + i), eval::KeyLabel::from_index(i)});
  const std::vector<std::size_t> all = {0, 1, 2, 3, 4, 5}, one = {3};
  const auto a = make_batch(pieces, all, 100, 7, 2);
  const auto b = make_batch(pieces, all, 100, 7, 2);
  EXPECT_EQ(std::memcmp(a.input.data(), b.input.data(), a.input.bytes()), 0);
  const auto c = make_batch(pieces, one, 100, 7, 2);
  EXPECT_EQ(c.shifts[0], a.shifts[3]);
  EXPECT_EQ(c.starts[0], a.starts[3]);
  std::set<int> shifts;
  for (int e = 0; e < 200; ++e) {
    for (int s : make_batch(pieces, all, 100, 7, static_cast<std::uint64_t>(e)).shifts) {
      EXPECT_GE(s, -4);
      EXPECT_LE(s, 7);
      shifts.insert(s);
    }
  }
  EXPECT_EQ(shifts.size(), 12u);
}

TEST(MakeBatch, RelabelRoundTrip) {
  for (int t = 0; t < 24; ++t)
    for (int s = -4; s <= 7; ++s) {
      const auto k = eval::KeyLabel::from_index(t);
      EXPECT_EQ(eval::transpose(eval::transpose(k, s), -s), k);
    }
}

TEST(EpochOrder, VisitsEveryPieceOnce) {
  for (int epoch = 1; epoch <= 5; ++epoch) {
    auto order = epoch_order(48, 3, epoch);
    EXPECT_EQ(order, epoch_order(48, 3, epoch));
    std::sort(order.begin(), order.end());
    for (std::size_t i = 0; i < order.size(); ++i) EXPECT_EQ(order[i], i);
  }
  EXPECT_NE(epoch_order(48, 3, 1), epoch_order(48, 3, 2));
}

TEST(EarlyStopping, MonotoneDecreaseStopsAfterPatience) {
  EarlyStopping stop(5);
  int epoch = 0;
  double score = 0.9;
  while (!stop.should_stop()) {
    stop.observe(++epoch, score);
    score -= 0.01;
  }
  EXPECT_EQ(epoch, 6);
  EXPECT_EQ(stop.best_epoch(), 1);
}

TEST(EarlyStopping, TiesDoNotCountAsImprovement) {
  EarlyStopping stop(2);
  EXPECT_TRUE(stop.observe(1, 0.5));
  EXPECT_FALSE(stop.observe(2, 0.5));
  EXPECT_FALSE(stop.observe(3, 0.5));
  EXPECT_TRUE(stop.should_stop());
  EXPECT_EQ(stop.best_epoch(), 1);
}

TEST(Fit, DeterministicReportAndConsistentBestScore) {
  const auto& d = tiny();
  const auto a = fit(models::build_model(small_allconv(), 1), d.train, d.valid, quick_config());
  const auto b = fit(models::build_model(small_allconv(), 1), d.train, d.valid, quick_config());
  std::ostringstream ca, cb;
  write_report_csv(ca, a.report);
  write_report_csv(cb, b.report);
  EXPECT_EQ(ca.str(), cb.str());
  ASSERT_EQ(a.report.epochs.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(a.report.epochs[i].train_loss, b.report.epochs[i].train_loss);
  EXPECT_NEAR(evaluate(a.best, d.valid).score.weighted, a.report.best_val_weighted, 1e-6);
  EXPECT_GE(a.report.best_epoch, 1);
}

TEST(Fit, RejectsOverlappingSets) {
  const auto& d = tiny();
  EXPECT_THROW(fit(models::build_model(small_allconv()), d.train, d.train, quick_config()), ConfigError);
}

TEST(Fit, RejectsSnippetsBelowTheModelMinimum) {
  const auto& d = tiny();
  auto tc = quick_config();
  tc.snippet_frames = 4;
  EXPECT_THROW(fit(models::build_model(small_allconv()), d.train, d.valid, tc), ConfigError);
}

TEST(Fit, NonFiniteLossReportsEpochBatchAndRate) {
  auto train = tiny().train;
  train[0].spec.values.setConstant(std::numeric_limits<float>::quiet_NaN());
  try {
    fit(models::build_model(small_allconv()), train, tiny().valid, quick_config());
    FAIL();
  } catch (const TrainingError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("epoch 1"), std::string::npos) << msg;
    EXPECT_NE(msg.find("batch"), std::string::npos) << msg;
    EXPECT_NE(msg.find("learning rate 0.01"), std::string::npos) << msg;
  }
}

TEST(Fit, ReportWritersHaveExpectedColumns) {
  FitReport r;
  r.epochs.push_back({1, 2.5, 0.25, 0.5, 0.5, 0.01});
  std::ostringstream csv, json;
  write_report_csv(csv, r);
  write_report_json(json, r);
  EXPECT_EQ(csv.str(), "epoch,train_loss,train_acc,val_weighted\n1,2.5,0.25,0.5\n");
  EXPECT_NE(json.str().find("\"best_epoch\""), std::string::npos);
}

TEST(GridSearch, DefaultGridSizes) {
  GridSearchConfig c;
  c.kind = models::ArchKind::AllConv;
  EXPECT_EQ(grid_configs(c).size(), 21u);
  c.kind = models::ArchKind::KeyNet;
  EXPECT_EQ(grid_configs(c).size(), 15u);
  EXPECT_EQ(grid_configs(c).front(), (std::pair<int, double>{8, 0.0}));
}

TEST(GridSearch, BootstrapDegenerateCases) {
  const std::vector<double> one = {0.7};
  EXPECT_EQ(bootstrap_ci(one, 10000, 0.95, 1).low, 0.7);
  EXPECT_EQ(bootstrap_ci(one, 10000, 0.95, 1).high, 0.7);
  const std::vector<double> same = {0.3, 0.3, 0.3};
  const auto ci = bootstrap_ci(same, 10000, 0.95, 1);
  EXPECT_EQ(ci.low, 0.3);
  EXPECT_EQ(ci.high, 0.3);
  const std::vector<double> spread = {0.1, 0.5, 0.9, 0.4};
  const auto s = bootstrap_ci(spread, 10000, 0.95, 1);
  EXPECT_LT(s.low, 0.475);
  EXPECT_GT(s.high, 0.475);
  EXPECT_GE(s.low, 0.1);
  EXPECT_LE(s.high, 0.9);
}

TEST(GridSearch, RunsEveryConfigAndWritesCsv) {
  GridSearchConfig c;
  c.feature_maps = {2};
  c.dropouts = {0.0, 0.1};
  c.seeds = {1, 2};
  c.train = quick_config();
  c.train.max_epochs = 1;
  c.bootstrap_resamples = 200;
  const auto rows = grid_search(c, tiny().train, tiny().valid);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.scores.size(), 2u);
    EXPECT_LE(r.ci_low, r.mean + 1e-12);
    EXPECT_GE(r.ci_high, r.mean - 1e-12);
  }
  std::ostringstream out;
  write_grid_csv(out, rows);
  EXPECT_EQ(out.str().rfind("n_feature_maps,dropout,runs,mean_weighted,ci_low,ci_high,mean_overfit_ratio\n", 0), 0u);
}

TEST(Timing, EqualLengthsGiveRatioNearOne) {
  models::ArchitectureConfig k;
  k.kind = models::ArchKind::KeyNet;
  k.n_feature_maps = 2;
  TimingConfig tc;
  tc.piece_frames = 100;
  tc.snippet_frames = 100;
  tc.batch_size = 2;
  tc.updates = 20;
  const auto r = full_vs_snippet_timing(k, tc);
  EXPECT_NEAR(r.ratio, 1.0, 0.2);
  EXPECT_EQ(r.full_activation_bytes, r.snippet_activation_bytes);
}

TEST(Timing, SnippetsHoldLessActivationMemory) {
  models::ArchitectureConfig k;
  k.kind = models::ArchKind::KeyNet;
  k.n_feature_maps = 2;
  TimingConfig tc;
  tc.piece_frames = 120;
  tc.snippet_frames = 20;
  tc.batch_size = 1;
  tc.updates = 3;
  const auto r = full_vs_snippet_timing(k, tc);
  EXPECT_LT(r.snippet_activation_bytes, r.full_activation_bytes);
  EXPECT_GT(r.snippet_activation_bytes, 0u);
}
