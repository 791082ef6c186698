#include "keyscope/data/chords.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <optional>

#include "keyscope/error.hpp"
#include "keyscope/eval/key_label.hpp"
#include "keyscope/util/csv.hpp"

namespace keyscope::data {
namespace {

constexpr double kModeThreshold = 0.8;

std::optional<ModeDecision> vote(int root, std::span<const ChordEvent> chords) {
  std::size_t major = 0, minor = 0;
  for (const auto& c : chords) {
    if (c.root != root) continue;
    if (c.quality == ChordQuality::Major) ++major;
    if (c.quality == ChordQuality::Minor) ++minor;
  }
  const std::size_t total = major + minor;
  if (total == 0) return std::nullopt;
  if (static_cast<double>(major) > kModeThreshold * static_cast<double>(total)) return ModeDecision::Major;
  if (static_cast<double>(minor) > kModeThreshold * static_cast<double>(total)) return ModeDecision::Minor;
  return ModeDecision::Undetermined;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

std::string mode_decision_name(ModeDecision decision) {
  switch (decision) {
    case ModeDecision::Major:
      return "major";
    case ModeDecision::Minor:
      return "minor";
    case ModeDecision::Undetermined:
      return "undetermined";
  }
  return "undetermined";
}

ModeDecision derive_mode_from_chords(int tonic, std::span<const ChordEvent> chords) {
  if (const auto on_tonic = vote(tonic, chords)) return *on_tonic;
  if (const auto on_dominant = vote((tonic + 7) % 12, chords)) return *on_dominant;
  return ModeDecision::Undetermined;
}

ChordQuality parse_chord_quality(const std::string& text) {
  const std::string t = lower(text);
  if (t == "maj" || t == "major") return ChordQuality::Major;
  if (t == "min" || t == "minor") return ChordQuality::Minor;
  if (t == "7" || t == "dom" || t == "dom7" || t == "dominant") return ChordQuality::Dominant;
  return ChordQuality::Other;
}

std::map<std::string, std::vector<ChordEvent>> load_chords(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open chord annotations: " + path.string());
  const auto rows = csv::read_rows(in);
  std::map<std::string, std::vector<ChordEvent>> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& f = rows[r].fields;
    const std::string at = path.string() + " line " + std::to_string(rows[r].line) + ": ";
    if (f.size() != 4) throw ParseError(at + "expected id,onset_s,root,quality");
    ChordEvent ev;
    try {
      ev.onset_s = std::stod(f[1]);
    } catch (const std::exception&) {
      throw ParseError(at + "invalid onset '" + f[1] + "'");
    }
    const bool numeric = !f[2].empty() && std::all_of(f[2].begin(), f[2].end(), [](unsigned char c) { return std::isdigit(c); });
    if (numeric) {
      ev.root = std::stoi(f[2]);
      if (ev.root > 11) throw ParseError(at + "root outside 0..11");
    } else {
      try {
        ev.root = eval::parse_key_label(f[2] + " major").tonic;
      } catch (const LabelError&) {
        throw ParseError(at + "invalid root '" + f[2] + "'");
      }
    }
    ev.quality = parse_chord_quality(f[3]);
    auto& seq = out[f[0]];
    if (!seq.empty() && ev.onset_s < seq.back().onset_s) throw ParseError(at + "onsets must be non-decreasing");
    seq.push_back(ev);
  }
  return out;
}

}  // namespace keyscope::data
