#include "keyscope/eval/key_label.hpp"

#include <array>
#include <cctype>

#include "keyscope/error.hpp"

namespace keyscope::eval {
namespace {

constexpr std::array<const char*, 12> kTonicNames = {"C", "C#", "D", "D#", "E", "F",
                                                     "F#", "G", "G#", "A", "A#", "B"};

std::string lower_trimmed(std::string_view text) {
  std::size_t b = 0, e = text.size();
  while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
  std::string out;
  for (std::size_t i = b; i < e; ++i) out += static_cast<char>(std::tolower(static_cast<unsigned char>(text[i])));
  return out;
}

}  // namespace

KeyLabel KeyLabel::from_index(int index) {
  if (index < 0 || index >= kNumKeys) throw IndexError("key class index " + std::to_string(index) + " outside 0..23");
  return KeyLabel{index % 12, index < 12 ? KeyMode::Major : KeyMode::Minor};
}

std::string format_key_label(const KeyLabel& key) {
  return std::string(kTonicNames[static_cast<std::size_t>(key.tonic)]) +
         (key.mode == KeyMode::Major ? " major" : " minor");
}

KeyLabel parse_key_label(std::string_view text) {
  const std::string s = lower_trimmed(text);
  const auto fail = [&]() -> KeyLabel { throw LabelError("cannot parse key label '" + std::string(text) + "'"); };
  if (s.empty()) return fail();

  static constexpr std::array<int, 7> kLetterPitch = {9, 11, 0, 2, 4, 5, 7};  // a..g
  if (s[0] < 'a' || s[0] > 'g') return fail();
  int tonic = kLetterPitch[static_cast<std::size_t>(s[0] - 'a')];
  std::size_t pos = 1;
  // Accidentals; the letter itself is already consumed, so "bb" is B flat.
  while (pos < s.size() && (s[pos] == '#' || s[pos] == 'b')) {
    tonic += s[pos] == '#' ? 1 : -1;
    ++pos;
  }
  tonic = ((tonic % 12) + 12) % 12;

  while (pos < s.size() && (s[pos] == ' ' || s[pos] == ':' || s[pos] == '_' || s[pos] == '-')) ++pos;
  const std::string mode = s.substr(pos);
  if (mode == "major" || mode == "maj") return KeyLabel{tonic, KeyMode::Major};
  if (mode == "minor" || mode == "min" || mode == "m") return KeyLabel{tonic, KeyMode::Minor};
  return fail();
}

KeyLabel transpose(const KeyLabel& key, int semitones) {
  return KeyLabel{(((key.tonic + semitones) % 12) + 12) % 12, key.mode};
}

}  // namespace keyscope::eval
