#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace keyscope::data {

enum class ChordQuality { Major, Minor, Dominant, Other };

struct ChordEvent {
  double onset_s = 0.0;
  int root = 0;  // pitch class 0..11
  ChordQuality quality = ChordQuality::Other;
};

enum class ModeDecision { Major, Minor, Undetermined };

std::string mode_decision_name(ModeDecision decision);

/// Mode of a segment with a known tonic, from its chord annotations. Among the
/// major and minor chords rooted on the tonic, a quality that makes up more
/// than 80% decides the mode. With no such tonic chords the same test runs on
/// chords rooted on the dominant (tonic + 7). Otherwise undetermined.
ModeDecision derive_mode_from_chords(int tonic, std::span<const ChordEvent> chords);

/// "maj"/"major", "min"/"minor", "7"/"dom"/"dominant"; anything else is Other.
ChordQuality parse_chord_quality(const std::string& text);

/// CSV id,onset_s,root,quality grouped by id. Roots are 0..11 or note names.
/// Throws ParseError for bad rows or onsets that decrease within an id.
std::map<std::string, std::vector<ChordEvent>> load_chords(const std::filesystem::path& path);

}  // namespace keyscope::data
