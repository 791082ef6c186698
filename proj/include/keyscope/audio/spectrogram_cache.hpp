#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "keyscope/audio/spectrogram.hpp"

namespace keyscope::audio {

// Layout: "KSPC", version u32, n_frames u32, n_bins u32, then n_frames * n_bins
// float32 values in time-major order, all little-endian. An optional trailer
// ("KSMD", byte length u32, UTF-8 JSON) records where the values came from.

inline constexpr std::uint32_t kSpectrogramCacheVersion = 1;

struct CacheMetadata {
  std::int64_t source_mtime = 0;  // seconds since epoch; 0 for synthesized input
  std::uint64_t frontend_hash = 0;

  bool operator==(const CacheMetadata&) const = default;
};

void save_spectrogram(const std::filesystem::path& path, const LogFreqSpectrogram& spec,
                      const std::optional<CacheMetadata>& meta = std::nullopt);

/// Throws LoadError on bad magic, version mismatch or truncation.
LogFreqSpectrogram load_spectrogram(const std::filesystem::path& path);

/// Metadata trailer if present and readable, otherwise nullopt.
std::optional<CacheMetadata> read_cache_metadata(const std::filesystem::path& path);

}  // namespace keyscope::audio
