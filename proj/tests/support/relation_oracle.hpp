#pragma once

#include <algorithm>
#include <array>
#include <string>

#include "keyscope/eval/relation.hpp"

namespace keyscope::testing {

// Relation lookup driven by the circle of fifths instead of semitone arithmetic.
// Majors and their relative minors share a position on the circle; neighbouring
// positions are a fifth apart.
inline constexpr std::array<const char*, 12> kMajorCircle = {"C",  "G",  "D",  "A",  "E",  "B",
                                                             "F#", "C#", "G#", "D#", "A#", "F"};
inline constexpr std::array<const char*, 12> kMinorCircle = {"A",  "E",  "B",  "F#", "C#", "G#",
                                                             "D#", "A#", "F",  "C",  "G",  "D"};
inline constexpr std::array<const char*, 12> kChromatic = {"C",  "C#", "D",  "D#", "E",  "F",
                                                           "F#", "G",  "G#", "A",  "A#", "B"};

inline int circle_position(const eval::KeyLabel& key) {
  const auto& circle = key.mode == eval::KeyMode::Major ? kMajorCircle : kMinorCircle;
  const std::string name = kChromatic[static_cast<std::size_t>(key.tonic)];
  return static_cast<int>(std::find(circle.begin(), circle.end(), name) - circle.begin());
}

inline eval::RelationCategory oracle_relation(const eval::KeyLabel& pred, const eval::KeyLabel& target) {
  const int a = circle_position(pred), b = circle_position(target);
  const bool same_mode = pred.mode == target.mode;
  const bool same_name = std::string(kChromatic[static_cast<std::size_t>(pred.tonic)]) ==
                         kChromatic[static_cast<std::size_t>(target.tonic)];
  if (same_mode && a == b) return eval::RelationCategory::Correct;
  if (same_mode && ((a + 1) % 12 == b || (b + 1) % 12 == a)) return eval::RelationCategory::Fifth;
  if (!same_mode && a == b) return eval::RelationCategory::Relative;
  if (!same_mode && same_name) return eval::RelationCategory::Parallel;
  return eval::RelationCategory::Other;
}

}  // namespace keyscope::testing
