#pragma once

#include <array>
#include <span>
#include <string>
#include <utility>

#include "keyscope/eval/key_label.hpp"

namespace keyscope::eval {

enum class RelationCategory { Correct = 0, Fifth, Relative, Parallel, Other };

inline constexpr std::array<RelationCategory, 5> kAllCategories = {
    RelationCategory::Correct, RelationCategory::Fifth, RelationCategory::Relative, RelationCategory::Parallel,
    RelationCategory::Other};

std::string category_name(RelationCategory category);

/// MIREX key relation of a prediction to its target.
///   Correct:  same tonic and mode.
///   Fifth:    same mode, tonics a fifth apart in either direction.
///   Relative: modes differ; a minor prediction sits 3 semitones below the
///             target tonic, a major prediction 3 semitones above it.
///   Parallel: modes differ, same tonic.
///   Other:    anything else.
RelationCategory classify_relation(const KeyLabel& pred, const KeyLabel& target);

struct ScoreBreakdown {
  double correct = 0.0;
  double fifth = 0.0;
  double relative = 0.0;
  double parallel = 0.0;
  double other = 0.0;
  double weighted = 0.0;
  std::size_t n = 0;
};

/// w = r_c + 0.5 r_f + 0.3 r_r + 0.2 r_p
double weighted_score(double correct, double fifth, double relative, double parallel);

/// Category ratios and weighted score; throws ConfigError on an empty list.
ScoreBreakdown score(std::span<const std::pair<KeyLabel, KeyLabel>> pred_target);

/// Builds a breakdown from category counts.
ScoreBreakdown score_from_counts(const std::array<std::size_t, 5>& counts);

/// Percentage with one decimal, rounded half-up: 0.7465 -> "74.7".
std::string format_percent(double ratio);

}  // namespace keyscope::eval
