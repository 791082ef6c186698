#include "keyscope/data/manifest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "keyscope/audio/spectrogram_cache.hpp"
#include "keyscope/error.hpp"
#include "keyscope/util/binary_io.hpp"
#include "keyscope/util/csv.hpp"

namespace keyscope::data {
namespace {

const std::array<std::string, 7> kColumns = {"id", "path", "key", "dataset", "split", "offset_s", "duration_s"};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

double parse_seconds(const std::string& text, std::size_t line, const char* column) {
  const std::string t = trim(text);
  if (t.empty()) return 0.0;
  try {
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used != t.size() || !std::isfinite(v) || v < 0.0) throw std::invalid_argument(t);
    return v;
  } catch (const std::exception&) {
    throw ParseError("manifest line " + std::to_string(line) + ": invalid " + column + " '" + t + "'");
  }
}

}  // namespace

std::string split_name(Split split) {
  switch (split) {
    case Split::Train:
      return "train";
    case Split::Valid:
      return "valid";
    case Split::Test:
      return "test";
    case Split::Unassigned:
      return "unassigned";
  }
  return "unassigned";
}

Split parse_split(const std::string& text) {
  const std::string t = lower(trim(text));
  if (t == "train") return Split::Train;
  if (t == "valid" || t == "validation") return Split::Valid;
  if (t == "test") return Split::Test;
  if (t.empty() || t == "unassigned") return Split::Unassigned;
  throw ParseError("unknown split '" + text + "'");
}

std::vector<ManifestEntry> parse_manifest(std::istream& in, const std::filesystem::path& base_dir) {
  const auto rows = csv::read_rows(in);
  if (rows.empty()) throw ParseError("manifest is empty (header expected)");

  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < rows[0].fields.size(); ++i) col[lower(trim(rows[0].fields[i]))] = i;
  for (const auto& name : kColumns) {
    if (!col.contains(name)) {
      throw ParseError("manifest line " + std::to_string(rows[0].line) + ": missing column '" + name + "'");
    }
  }

  std::vector<ManifestEntry> entries;
  std::set<std::string> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::string at = "manifest line " + std::to_string(row.line) + ": ";
    if (row.fields.size() != rows[0].fields.size()) {
      throw ParseError(at + "expected " + std::to_string(rows[0].fields.size()) + " fields, got " +
                       std::to_string(row.fields.size()));
    }
    const auto field = [&](const char* name) { return trim(row.fields[col.at(name)]); };

    ManifestEntry e;
    e.id = field("id");
    if (e.id.empty()) throw ParseError(at + "empty id");
    if (!seen.insert(e.id).second) throw ParseError(at + "duplicate id '" + e.id + "'");

    const std::string path = field("path");
    if (path.empty()) throw ParseError(at + "empty path for '" + e.id + "'");
    std::filesystem::path p(path);
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    if (lower(p.extension().string()) == ".kspc") {
      e.feature_path = p;
    } else {
      e.audio_path = p;
    }

    e.key_text = field("key");
    try {
      e.key = eval::parse_key_label(e.key_text);
    } catch (const LabelError& err) {
      throw LabelError(at + err.what());
    }
    e.dataset = field("dataset");
    try {
      e.split = parse_split(field("split"));
    } catch (const ParseError& err) {
      throw ParseError(at + err.what());
    }
    e.offset_s = parse_seconds(field("offset_s"), row.line, "offset_s");
    e.duration_s = parse_seconds(field("duration_s"), row.line, "duration_s");
    entries.push_back(std::move(e));
  }
  return entries;
}

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest: " + path.string());
  try {
    return parse_manifest(in, path.parent_path());
  } catch (const LabelError& e) {
    throw LabelError(path.string() + ": " + e.what());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_manifest(std::ostream& out, const std::vector<ManifestEntry>& entries) {
  out << "id,path,key,dataset,split,offset_s,duration_s\n";
  for (const auto& e : entries) {
    const auto& p = e.feature_path.empty() ? e.audio_path : e.feature_path;
    out << csv::escape(e.id) << ',' << csv::escape(p.string()) << ',' << csv::escape(eval::format_key_label(e.key))
        << ',' << csv::escape(e.dataset) << ',' << split_name(e.split) << ',' << e.offset_s << ',' << e.duration_s
        << '\n';
  }
}

void save_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write manifest: " + path.string());
  write_manifest(out, entries);
}

std::vector<ManifestEntry> assign_splits(std::vector<ManifestEntry> entries, const std::array<double, 3>& ratios,
                                         std::uint64_t seed) {
  double sum = 0.0;
  for (double r : ratios) {
    if (!(r >= 0.0)) throw ConfigError("split ratios must be non-negative");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("split ratios must sum to 1");

  std::string seed_bytes(8, '\0');
  for (int i = 0; i < 8; ++i) seed_bytes[static_cast<std::size_t>(i)] = static_cast<char>((seed >> (8 * i)) & 0xFF);
  const std::uint64_t seed_hash = io::fnv1a64(seed_bytes);

  std::vector<std::pair<std::uint64_t, std::size_t>> ranked;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].split == Split::Unassigned) ranked.emplace_back(io::fnv1a64(entries[i].id, seed_hash), i);
  }
  std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
    return a.first != b.first ? a.first < b.first : entries[a.second].id < entries[b.second].id;
  });

  const double n = static_cast<double>(ranked.size());
  const auto train_end = static_cast<std::size_t>(std::llround(ratios[0] * n));
  const auto valid_end = static_cast<std::size_t>(std::llround((ratios[0] + ratios[1]) * n));
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    entries[ranked[r].second].split = r < train_end ? Split::Train : (r < valid_end ? Split::Valid : Split::Test);
  }
  return entries;
}

bool is_classical(const ManifestEntry& entry) { return lower(trim(entry.dataset)) == "classical"; }

ManifestEntry apply_classical_rule(ManifestEntry entry) {
  if (!is_classical(entry)) return entry;
  entry.offset_s = 0.0;
  if (entry.duration_s <= 0.0 || entry.duration_s > kClassicalExcerptSeconds) entry.duration_s = kClassicalExcerptSeconds;
  return entry;
}

std::filesystem::path cache_path(const ManifestEntry& entry, const std::filesystem::path& cache_dir) {
  if (!entry.feature_path.empty()) return entry.feature_path;
  return cache_dir / (entry.id + ".kspc");
}

std::vector<training::LabeledPiece> load_pieces(const std::vector<ManifestEntry>& entries,
                                                const std::filesystem::path& cache_dir) {
  std::vector<training::LabeledPiece> pieces;
  pieces.reserve(entries.size());
  for (const auto& e : entries) {
    const auto path = cache_path(e, cache_dir);
    if (!std::filesystem::exists(path)) {
      throw DataError("missing spectrogram cache for '" + e.id + "': " + path.string());
    }
    try {
      pieces.push_back({e.id, audio::load_spectrogram(path), e.key});
    } catch (const LoadError& err) {
      throw DataError("unreadable spectrogram cache for '" + e.id + "': " + err.what());
    }
  }
  return pieces;
}

}  // namespace keyscope::data
