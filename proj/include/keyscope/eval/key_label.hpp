#pragma once

#include <string>
#include <string_view>

namespace keyscope::eval {

enum class KeyMode { Major = 0, Minor = 1 };

inline constexpr int kNumKeys = 24;

/// Tonic pitch class (0 = C, ascending semitones) plus mode.
/// Class index = 12 * mode + tonic, so majors occupy 0..11 and minors 12..23.
struct KeyLabel {
  int tonic = 0;
  KeyMode mode = KeyMode::Major;

  int index() const { return 12 * static_cast<int>(mode) + tonic; }
  bool operator==(const KeyLabel&) const = default;

  /// Throws IndexError outside 0..23.
  static KeyLabel from_index(int index);
};

/// "C major", "F# minor", ... (sharps for accidentals).
std::string format_key_label(const KeyLabel& key);

/// Accepts e.g. "C major", "c:maj", "Gb minor", "F#min", "Am", "Dm".
/// Enharmonic spellings fold to one pitch class. Throws LabelError.
KeyLabel parse_key_label(std::string_view text);

/// Label after transposing by `semitones` (mode unchanged).
KeyLabel transpose(const KeyLabel& key, int semitones);

}  // namespace keyscope::eval
