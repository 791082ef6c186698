#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "json.hpp"
#include "keyscope/models/network.hpp"

namespace keyscope::models {

// Layout (little-endian): "KNET", version u32, tensor count u32; per tensor:
// name length u32, UTF-8 name, rank u32, dims u32 each, float32 payload.
// Then a metadata block: byte length u32 followed by UTF-8 JSON holding the
// architecture under "architecture" and any caller-supplied fields under "extra".

inline constexpr std::uint32_t kCheckpointVersion = 1;

nlohmann::json config_to_json(const ArchitectureConfig& config);
ArchitectureConfig config_from_json(const nlohmann::json& j);

void write_checkpoint(std::ostream& out, const Model& model, const nlohmann::json& extra = nlohmann::json::object());
void save_checkpoint(const std::filesystem::path& path, const Model& model,
                     const nlohmann::json& extra = nlohmann::json::object());

struct LoadedCheckpoint {
  Model model;
  nlohmann::json extra;
};

/// Throws LoadError on bad magic, version mismatch, truncation or tensor name/shape mismatch.
LoadedCheckpoint read_checkpoint(std::istream& in);
Model load_checkpoint(const std::filesystem::path& path);
LoadedCheckpoint load_checkpoint_with_metadata(const std::filesystem::path& path);

}  // namespace keyscope::models
