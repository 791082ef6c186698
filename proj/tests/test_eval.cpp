#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <sstream>

#include "keyscope/error.hpp"
#include "keyscope/eval/duration.hpp"
#include "keyscope/eval/key_label.hpp"
#include "keyscope/eval/relation.hpp"
#include "keyscope/nn/rng.hpp"
#include "support/published_rows.hpp"
#include "support/relation_oracle.hpp"

using namespace keyscope;
using namespace keyscope::eval;

namespace {

KeyLabel key(const char* text) { return parse_key_label(text); }

}  // namespace

TEST(KeyLabel, IndexIsBijective) {
  for (int i = 0; i < kNumKeys; ++i) EXPECT_EQ(KeyLabel::from_index(i).index(), i);
  EXPECT_EQ(KeyLabel::from_index(0), (KeyLabel{0, KeyMode::Major}));
  EXPECT_EQ(KeyLabel::from_index(12), (KeyLabel{0, KeyMode::Minor}));
  EXPECT_THROW(KeyLabel::from_index(24), IndexError);
  EXPECT_THROW(KeyLabel::from_index(-1), IndexError);
}

TEST(KeyLabel, ParsesCommonSpellings) {
  EXPECT_EQ(key("C major").index(), 0);
  EXPECT_EQ(key("F# minor"), (KeyLabel{6, KeyMode::Minor}));
  EXPECT_EQ(key("Gb minor"), key("F# minor"));
  EXPECT_EQ(key("Am"), (KeyLabel{9, KeyMode::Minor}));
  EXPECT_EQ(key("Dm"), (KeyLabel{2, KeyMode::Minor}));
  EXPECT_EQ(key("c:maj"), (KeyLabel{0, KeyMode::Major}));
  EXPECT_EQ(key("bb MIN"), (KeyLabel{10, KeyMode::Minor}));
  EXPECT_EQ(key("Cb major"), (KeyLabel{11, KeyMode::Major}));
  EXPECT_EQ(key("E#minor"), (KeyLabel{5, KeyMode::Minor}));
}

TEST(KeyLabel, RejectsGarbageWithTheOffendingText) {
  for (const char* bad : {"H major", "", "C", "C dorian", "major", "C# majestic"}) {
    try {
      parse_key_label(bad);
      FAIL() << bad;
    } catch (const LabelError& e) {
      EXPECT_NE(std::string(e.what()).find(std::string("'") + bad + "'"), std::string::npos) << e.what();
    }
  }
}

TEST(KeyLabel, FormatParseRoundTrip) {
  for (int i = 0; i < kNumKeys; ++i) {
    const auto k = KeyLabel::from_index(i);
    EXPECT_EQ(parse_key_label(format_key_label(k)), k);
  }
}

TEST(KeyLabel, TransposeInverts) {
  for (int i = 0; i < kNumKeys; ++i) {
    for (int s = -4; s <= 7; ++s) {
      const auto k = KeyLabel::from_index(i);
      EXPECT_EQ(transpose(transpose(k, s), -s), k);
    }
  }
  EXPECT_EQ(transpose(key("C major"), 7), key("G major"));
}

TEST(Relation, DocumentedExamples) {
  EXPECT_EQ(classify_relation(key("C major"), key("C major")), RelationCategory::Correct);
  EXPECT_EQ(classify_relation(key("G major"), key("C major")), RelationCategory::Fifth);
  EXPECT_EQ(classify_relation(key("F major"), key("C major")), RelationCategory::Fifth);
  EXPECT_EQ(classify_relation(key("A minor"), key("C major")), RelationCategory::Relative);
  EXPECT_EQ(classify_relation(key("C major"), key("A minor")), RelationCategory::Relative);
  EXPECT_EQ(classify_relation(key("C minor"), key("C major")), RelationCategory::Parallel);
  EXPECT_EQ(classify_relation(key("D major"), key("C major")), RelationCategory::Other);
  EXPECT_EQ(classify_relation(key("E minor"), key("C major")), RelationCategory::Other);
}

TEST(Relation, ExhaustiveCountsAndTableOracle) {
  std::map<RelationCategory, int> counts;
  for (int p = 0; p < kNumKeys; ++p) {
    for (int t = 0; t < kNumKeys; ++t) {
      const auto pred = KeyLabel::from_index(p), target = KeyLabel::from_index(t);
      const auto c = classify_relation(pred, target);
      ++counts[c];
      EXPECT_EQ(c, keyscope::testing::oracle_relation(pred, target)) << p << " vs " << t;
    }
  }
  EXPECT_EQ(counts[RelationCategory::Correct], 24);
  EXPECT_EQ(counts[RelationCategory::Fifth], 48);
  EXPECT_EQ(counts[RelationCategory::Relative], 24);
  EXPECT_EQ(counts[RelationCategory::Parallel], 24);
  EXPECT_EQ(counts[RelationCategory::Other], 456);
}

TEST(Relation, SymmetricAndTranspositionInvariant) {
  for (int p = 0; p < kNumKeys; ++p) {
    for (int t = 0; t < kNumKeys; ++t) {
      const auto a = KeyLabel::from_index(p), b = KeyLabel::from_index(t);
      EXPECT_EQ(classify_relation(a, b), classify_relation(b, a));
      for (int k = 0; k < 12; ++k) EXPECT_EQ(classify_relation(transpose(a, k), transpose(b, k)), classify_relation(a, b));
    }
  }
}

TEST(Score, AllCorrectIsOne) {
  std::vector<std::pair<KeyLabel, KeyLabel>> pairs;
  for (int i = 0; i < kNumKeys; ++i) pairs.emplace_back(KeyLabel::from_index(i), KeyLabel::from_index(i));
  const auto s = score(pairs);
  EXPECT_DOUBLE_EQ(s.weighted, 1.0);
  EXPECT_EQ(s.n, 24u);
  EXPECT_THROW(score(std::span<const std::pair<KeyLabel, KeyLabel>>{}), ConfigError);
}

TEST(Score, PublishedRowsRecomputeWithinRounding) {
  for (const auto& row : keyscope::testing::published_rows()) {
    const double w = weighted_score(row.correct, row.fifth, row.relative, row.parallel);
    EXPECT_NEAR(w, row.weighted, keyscope::testing::kPublishedTolerance) << row.dataset << " " << row.system;
  }
  EXPECT_NEAR(weighted_score(0.679, 0.070, 0.081, 0.041), 0.7465, 1e-12);
  EXPECT_EQ(format_percent(weighted_score(0.763, 0.076, 0.054, 0.037)), "82.5");
}

TEST(Score, CountsFixtureReproducesGiantStepsRow) {
  const auto s = score_from_counts(keyscope::testing::kGiantStepsCounts);
  EXPECT_EQ(s.n, 604u);
  EXPECT_EQ(format_percent(s.correct), "67.9");
  EXPECT_EQ(format_percent(s.fifth), "7.0");
  EXPECT_EQ(format_percent(s.relative), "8.1");
  EXPECT_EQ(format_percent(s.parallel), "4.1");
  EXPECT_EQ(format_percent(s.other), "12.9");
  EXPECT_NEAR(100 * s.weighted, 74.6, 0.15);
}

TEST(Score, RatiosSumToOneAndOrderDoesNotMatter) {
  nn::RngStream rng(3);
  std::vector<std::pair<KeyLabel, KeyLabel>> pairs;
  for (int i = 0; i < 500; ++i) {
    pairs.emplace_back(KeyLabel::from_index(static_cast<int>(rng.below(24))),
                       KeyLabel::from_index(static_cast<int>(rng.below(24))));
  }
  const auto a = score(pairs);
  EXPECT_NEAR(a.correct + a.fifth + a.relative + a.parallel + a.other, 1.0, 1e-9);
  EXPECT_NEAR(a.weighted, weighted_score(a.correct, a.fifth, a.relative, a.parallel), 1e-15);
  rng.shuffle(pairs.begin(), pairs.end());
  const auto b = score(pairs);
  EXPECT_EQ(a.weighted, b.weighted);
  EXPECT_EQ(a.other, b.other);
}

TEST(FormatPercent, RoundsHalfUp) {
  EXPECT_EQ(format_percent(0.7465), "74.7");
  EXPECT_EQ(format_percent(1.0), "100.0");
  EXPECT_EQ(format_percent(0.0), "0.0");
  EXPECT_EQ(format_percent(0.12345), "12.3");
}

TEST(Duration, QuartilesClosedForm) {
  const std::vector<DurationItem> items = {{10, true}, {20, true}, {30, true}};
  const auto r = duration_report(items);
  EXPECT_DOUBLE_EQ(r.correct.median, 20);
  EXPECT_DOUBLE_EQ(r.correct.lower_quartile, 15);
  EXPECT_DOUBLE_EQ(r.correct.upper_quartile, 25);
  EXPECT_EQ(r.incorrect.n, 0u);
  EXPECT_TRUE(r.incorrect.density.empty());
  ASSERT_EQ(r.grid.size(), 256u);
  EXPECT_DOUBLE_EQ(r.grid.front(), 0.0);
  EXPECT_NEAR(r.grid.back(), 33.0, 1e-12);
  EXPECT_NEAR(trapezoid(r.grid, r.correct.density), 1.0, 1e-3);
}

TEST(Duration, IdenticalGroupsGiveIdenticalCurves) {
  std::vector<DurationItem> items;
  for (double d : {40.0, 55.0, 61.0, 90.0, 120.0}) {
    items.push_back({d, true});
    items.push_back({d, false});
  }
  const auto r = duration_report(items);
  EXPECT_EQ(r.correct.density, r.incorrect.density);
  for (double v : r.correct.density) EXPECT_GE(v, 0.0);
}

TEST(Duration, RecoversMediansOfNormalSamples) {
  std::mt19937_64 gen(11);
  std::normal_distribution<double> a(131.0, 20.0), b(51.0, 10.0);
  std::vector<DurationItem> items;
  for (int i = 0; i < 1000; ++i) {
    items.push_back({a(gen), true});
    items.push_back({b(gen), false});
  }
  const auto r = duration_report(items);
  EXPECT_NEAR(r.correct.median, 131.0, 0.05 * 131.0);
  EXPECT_NEAR(r.incorrect.median, 51.0, 0.05 * 51.0);
  EXPECT_LE(r.correct.lower_quartile, r.correct.median);
  EXPECT_LE(r.correct.median, r.correct.upper_quartile);
  EXPECT_NEAR(trapezoid(r.grid, r.correct.density), 1.0, 1e-3);
  EXPECT_NEAR(trapezoid(r.grid, r.incorrect.density), 1.0, 1e-3);
}

TEST(Duration, SilvermanBandwidthClosedForm) {
  const std::vector<double> v = {1, 2, 3, 4, 5};
  // sd = sqrt(2.5), IQR = 2 -> min(1.5811, 1.4925) = 1.4925
  EXPECT_NEAR(silverman_bandwidth(v), 0.9 * (2.0 / 1.34) * std::pow(5.0, -0.2), 1e-12);
  const std::vector<double> c = {3, 3, 3};
  EXPECT_GT(silverman_bandwidth(c), 0.0);
}

TEST(Duration, CsvHasHeaderAndGridRows) {
  const std::vector<DurationItem> items = {{10, true}, {20, true}, {5, false}};
  std::ostringstream out;
  write_duration_csv(out, duration_report(items));
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "grid,density_correct,density_incorrect");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 256);
  EXPECT_THROW(duration_report(std::vector<DurationItem>{{0.0, true}}), ConfigError);
}
