#include "keyscope/eval/relation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "keyscope/error.hpp"

namespace keyscope::eval {
namespace {

int mod12(int v) { return ((v % 12) + 12) % 12; }

}  // namespace

std::string category_name(RelationCategory category) {
  switch (category) {
    case RelationCategory::Correct:
      return "Correct";
    case RelationCategory::Fifth:
      return "Fifth";
    case RelationCategory::Relative:
      return "Relative";
    case RelationCategory::Parallel:
      return "Parallel";
    case RelationCategory::Other:
      return "Other";
  }
  return "Other";
}

RelationCategory classify_relation(const KeyLabel& pred, const KeyLabel& target) {
  if (pred.mode == target.mode) {
    if (pred.tonic == target.tonic) return RelationCategory::Correct;
    if (pred.tonic == mod12(target.tonic + 7) || target.tonic == mod12(pred.tonic + 7)) {
      return RelationCategory::Fifth;
    }
    return RelationCategory::Other;
  }
  if (pred.mode == KeyMode::Minor && pred.tonic == mod12(target.tonic - 3)) return RelationCategory::Relative;
  if (pred.mode == KeyMode::Major && pred.tonic == mod12(target.tonic + 3)) return RelationCategory::Relative;
  if (pred.tonic == target.tonic) return RelationCategory::Parallel;
  return RelationCategory::Other;
}

double weighted_score(double correct, double fifth, double relative, double parallel) {
  return correct + 0.5 * fifth + 0.3 * relative + 0.2 * parallel;
}

ScoreBreakdown score_from_counts(const std::array<std::size_t, 5>& counts) {
  std::size_t n = 0;
  for (auto c : counts) n += c;
  if (n == 0) throw ConfigError("cannot score an empty prediction list");
  const double total = static_cast<double>(n);
  ScoreBreakdown out;
  out.n = n;
  out.correct = counts[0] / total;
  out.fifth = counts[1] / total;
  out.relative = counts[2] / total;
  out.parallel = counts[3] / total;
  out.other = counts[4] / total;
  out.weighted = weighted_score(out.correct, out.fifth, out.relative, out.parallel);
  return out;
}

ScoreBreakdown score(std::span<const std::pair<KeyLabel, KeyLabel>> pred_target) {
  std::array<std::size_t, 5> counts{};
  for (const auto& [pred, target] : pred_target) {
    ++counts[static_cast<std::size_t>(classify_relation(pred, target))];
  }
  return score_from_counts(counts);
}

std::string format_percent(double ratio) {
  // Nudge by a relative epsilon so binary representations like 74.64999... of an
  // exact decimal half still round up.
  const double scaled = ratio * 1000.0;
  const double tenths = std::floor(scaled + 0.5 + 1e-9 * std::max(1.0, std::abs(scaled)));
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", tenths / 10.0);
  return buf;
}

}  // namespace keyscope::eval
