#include "keyscope/audio/wav.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "keyscope/error.hpp"
#include "keyscope/util/binary_io.hpp"

namespace keyscope::audio {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t u16_at(const std::string& buf, std::size_t pos) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(buf[pos]) |
                                    (static_cast<unsigned char>(buf[pos + 1]) << 8));
}

std::uint32_t u32_at(const std::string& buf, std::size_t pos) {
  return static_cast<std::uint32_t>(u16_at(buf, pos)) | (static_cast<std::uint32_t>(u16_at(buf, pos + 2)) << 16);
}

void write_u16_le(std::ostream& out, std::uint16_t v) {
  const char b[2] = {static_cast<char>(v & 0xFF), static_cast<char>(v >> 8)};
  out.write(b, 2);
}

}  // namespace

AudioClip load_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open audio file: " + path.string());
  const std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string where = " in " + path.string();

  if (buf.size() < 12 || buf.compare(0, 4, "RIFF") != 0 || buf.compare(8, 4, "WAVE") != 0) {
    throw ParseError("not a RIFF/WAVE file" + where);
  }

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t data_pos = 0, data_size = 0;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= buf.size()) {
    const std::string id = buf.substr(pos, 4);
    const std::uint32_t size = u32_at(buf, pos + 4);
    const std::size_t body = pos + 8;
    if (id == "fmt ") {
      if (size < 16 || body + size > buf.size()) throw ParseError("malformed fmt chunk" + where);
      format = u16_at(buf, body);
      channels = u16_at(buf, body + 2);
      rate = u32_at(buf, body + 4);
      bits = u16_at(buf, body + 14);
      if (format == kFormatExtensible) {
        if (size < 40) throw ParseError("malformed extensible fmt chunk" + where);
        format = u16_at(buf, body + 24);  // first two bytes of the subformat GUID
      }
      have_fmt = true;
    } else if (id == "data") {
      data_pos = body;
      // Some writers leave the size at 0 or past EOF for streamed files; clamp to what exists.
      data_size = std::min<std::size_t>(size, buf.size() - body);
      have_data = true;
      break;
    }
    pos = body + size + (size & 1U);
  }
  if (!have_fmt) throw ParseError("missing fmt chunk" + where);
  if (!have_data) throw ParseError("missing data chunk" + where);
  if (rate != static_cast<std::uint32_t>(kSampleRate)) {
    throw DataError("resample unsupported: " + std::to_string(rate) + " Hz" + where);
  }
  if (channels != 1 && channels != 2) {
    throw ParseError("unsupported channel count " + std::to_string(channels) + where);
  }
  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool float32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !float32) {
    throw ParseError("unsupported sample format (tag " + std::to_string(format) + ", " + std::to_string(bits) +
                     " bits)" + where);
  }

  const std::size_t bytes_per_sample = bits / 8;
  const std::size_t frame_bytes = bytes_per_sample * channels;
  const std::size_t n_frames = data_size / frame_bytes;
  if (n_frames == 0) throw ParseError("empty data chunk" + where);

  AudioClip clip;
  clip.samples.resize(n_frames);
  for (std::size_t i = 0; i < n_frames; ++i) {
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t at = data_pos + i * frame_bytes + c * bytes_per_sample;
      if (pcm16) {
        acc += static_cast<std::int16_t>(u16_at(buf, at)) / 32768.0;
      } else {
        acc += std::bit_cast<float>(u32_at(buf, at));
      }
    }
    clip.samples[i] = acc / channels;
  }
  return clip;
}

void save_wav(const std::filesystem::path& path, const std::vector<double>& interleaved, int channels,
              int sample_rate, WavEncoding encoding) {
  if (channels != 1 && channels != 2) throw ConfigError("save_wav: channels must be 1 or 2");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write audio file: " + path.string());

  const std::uint16_t bits = encoding == WavEncoding::Pcm16 ? 16 : 32;
  const std::uint16_t tag = encoding == WavEncoding::Pcm16 ? kFormatPcm : kFormatFloat;
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(interleaved.size() * (bits / 8));
  const std::uint16_t block_align = static_cast<std::uint16_t>(channels * bits / 8);

  io::write_bytes(out, "RIFF");
  io::write_u32_le(out, 36 + data_bytes);
  io::write_bytes(out, "WAVEfmt ");
  io::write_u32_le(out, 16);
  write_u16_le(out, tag);
  write_u16_le(out, static_cast<std::uint16_t>(channels));
  io::write_u32_le(out, static_cast<std::uint32_t>(sample_rate));
  io::write_u32_le(out, static_cast<std::uint32_t>(sample_rate) * block_align);
  write_u16_le(out, block_align);
  write_u16_le(out, bits);
  io::write_bytes(out, "data");
  io::write_u32_le(out, data_bytes);
  for (double s : interleaved) {
    if (encoding == WavEncoding::Pcm16) {
      const double scaled = std::round(std::clamp(s, -1.0, 1.0) * 32768.0);
      write_u16_le(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0))));
    } else {
      io::write_f32_le(out, static_cast<float>(s));
    }
  }
}

AudioClip slice(const AudioClip& clip, double offset_s, double duration_s) {
  const auto n = static_cast<std::int64_t>(clip.samples.size());
  const auto begin = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::llround(offset_s * clip.sample_rate)), 0, n);
  std::int64_t end = n;
  if (duration_s > 0) {
    end = std::min(n, begin + static_cast<std::int64_t>(std::llround(duration_s * clip.sample_rate)));
  }
  AudioClip out;
  out.sample_rate = clip.sample_rate;
  out.samples.assign(clip.samples.begin() + begin, clip.samples.begin() + end);
  return out;
}

}  // namespace keyscope::audio
