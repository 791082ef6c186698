#include "keyscope/audio/spectrogram_cache.hpp"

#include <fstream>
#include <span>

#include "json.hpp"

#include "keyscope/error.hpp"
#include "keyscope/util/binary_io.hpp"

namespace keyscope::audio {
namespace {

constexpr char kMagic[] = "KSPC";
constexpr char kMetaMagic[] = "KSMD";

struct Header {
  std::uint32_t frames = 0;
  std::uint32_t bins = 0;
};

Header read_header(std::istream& in, const std::filesystem::path& path) {
  const std::string magic = io::read_string(in, 4, "cache magic");
  if (magic != kMagic) throw LoadError("not a spectrogram cache (bad magic): " + path.string());
  const auto version = io::read_u32_le(in, "cache version");
  if (version != kSpectrogramCacheVersion) {
    throw LoadError("unsupported spectrogram cache version " + std::to_string(version) + ": " + path.string());
  }
  Header h;
  h.frames = io::read_u32_le(in, "frame count");
  h.bins = io::read_u32_le(in, "bin count");
  if (h.frames == 0 || h.bins == 0) throw LoadError("empty spectrogram cache: " + path.string());
  return h;
}

}  // namespace

void save_spectrogram(const std::filesystem::path& path, const LogFreqSpectrogram& spec,
                      const std::optional<CacheMetadata>& meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write spectrogram cache: " + path.string());
  io::write_bytes(out, kMagic);
  io::write_u32_le(out, kSpectrogramCacheVersion);
  io::write_u32_le(out, static_cast<std::uint32_t>(spec.frames()));
  io::write_u32_le(out, static_cast<std::uint32_t>(spec.bins()));
  io::write_f32_le(out, std::span<const float>(spec.values.data(), static_cast<std::size_t>(spec.values.size())));
  if (meta) {
    const nlohmann::json j = {{"source_mtime", meta->source_mtime},
                              {"frontend_hash", meta->frontend_hash}};
    const std::string text = j.dump();
    io::write_bytes(out, kMetaMagic);
    io::write_u32_le(out, static_cast<std::uint32_t>(text.size()));
    io::write_bytes(out, text);
  }
  if (!out) throw Error("failed writing spectrogram cache: " + path.string());
}

LogFreqSpectrogram load_spectrogram(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open spectrogram cache: " + path.string());
  const Header h = read_header(in, path);
  LogFreqSpectrogram spec;
  spec.values.resize(h.frames, h.bins);
  const std::size_t n = static_cast<std::size_t>(h.frames) * h.bins;
  float* dst = spec.values.data();
  for (std::size_t i = 0; i < n; ++i) dst[i] = io::read_f32_le(in, "spectrogram values");
  return spec;
}

std::optional<CacheMetadata> read_cache_metadata(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  try {
    const Header h = read_header(in, path);
    in.seekg(static_cast<std::streamoff>(static_cast<std::uint64_t>(h.frames) * h.bins * 4), std::ios::cur);
    if (io::read_string(in, 4, "metadata magic") != kMetaMagic) return std::nullopt;
    const auto len = io::read_u32_le(in, "metadata length");
    const auto j = nlohmann::json::parse(io::read_string(in, len, "metadata"));
    CacheMetadata meta;
    meta.source_mtime = j.at("source_mtime").get<std::int64_t>();
    meta.frontend_hash = j.at("frontend_hash").get<std::uint64_t>();
    return meta;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace keyscope::audio
