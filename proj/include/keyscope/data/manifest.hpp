#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "keyscope/eval/key_label.hpp"
#include "keyscope/training/snippet.hpp"

namespace keyscope::data {

enum class Split { Train, Valid, Test, Unassigned };

std::string split_name(Split split);
/// "train", "valid"/"validation", "test", "unassigned" or empty.
Split parse_split(const std::string& text);

/// One audio item of a dataset. Exactly one of audio_path / feature_path is set
/// (".kspc" paths are features).
struct ManifestEntry {
  std::string id;
  std::filesystem::path audio_path;
  std::filesystem::path feature_path;
  std::string key_text;
  eval::KeyLabel key;
  std::string dataset;
  Split split = Split::Unassigned;
  double offset_s = 0.0;
  double duration_s = 0.0;  // 0 = to the end
};

/// Columns: id,path,key,dataset,split,offset_s,duration_s (any order, header required).
/// Relative paths resolve against `base_dir`. Errors name the offending line.
std::vector<ManifestEntry> parse_manifest(std::istream& in, const std::filesystem::path& base_dir = {});
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path);

void write_manifest(std::ostream& out, const std::vector<ManifestEntry>& entries);
void save_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);

/// Assigns train/valid/test to the unassigned entries only. Entries are ranked by
/// the 64-bit FNV-1a hash of (seed, id) and cut at the cumulative ratios, so the
/// outcome depends on ids alone, not on manifest order, and every split is within
/// one item of its exact share. Ratios must sum to 1.
std::vector<ManifestEntry> assign_splits(std::vector<ManifestEntry> entries, const std::array<double, 3>& ratios,
                                         std::uint64_t seed);

inline constexpr double kClassicalExcerptSeconds = 30.0;

bool is_classical(const ManifestEntry& entry);

/// Classical recordings keep only their first 30 s; other entries pass through.
ManifestEntry apply_classical_rule(ManifestEntry entry);

/// Cache path of an entry: its feature path, or <cache_dir>/<id>.kspc.
std::filesystem::path cache_path(const ManifestEntry& entry, const std::filesystem::path& cache_dir);

/// Loads the cached spectrogram of every entry; throws DataError naming the first missing one.
std::vector<training::LabeledPiece> load_pieces(const std::vector<ManifestEntry>& entries,
                                                const std::filesystem::path& cache_dir);

}  // namespace keyscope::data
