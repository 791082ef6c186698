#include "keyscope/models/checkpoint.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "keyscope/error.hpp"
#include "keyscope/util/binary_io.hpp"

namespace keyscope::models {
namespace {

constexpr char kMagic[] = "KNET";
constexpr std::uint32_t kMaxNameLength = 4096;
constexpr std::uint32_t kMaxMetadataLength = 1U << 24;

struct StoredTensor {
  nn::Shape shape;
  std::vector<float> values;
};

}  // namespace

nlohmann::json config_to_json(const ArchitectureConfig& config) {
  nlohmann::json j = {{"kind", arch_name(config.kind)},
                      {"n_feature_maps", config.n_feature_maps},
                      {"dropout_p", config.dropout_p},
                      {"n_bins", config.n_bins},
                      {"n_classes", config.n_classes}};
  if (config.kind == ArchKind::KeyNet) j["embedding_dim"] = config.effective_embedding_dim();
  return j;
}

ArchitectureConfig config_from_json(const nlohmann::json& j) {
  ArchitectureConfig c;
  c.kind = parse_arch(j.at("kind").get<std::string>());
  c.n_feature_maps = j.at("n_feature_maps").get<int>();
  c.dropout_p = j.at("dropout_p").get<double>();
  c.n_bins = j.at("n_bins").get<int>();
  c.n_classes = j.at("n_classes").get<int>();
  if (c.kind == ArchKind::KeyNet) {
    c.embedding_dim = j.value("embedding_dim", 0);
    if (c.embedding_dim == 2 * c.n_feature_maps) c.embedding_dim = 0;
  }
  return c;
}

void write_checkpoint(std::ostream& out, const Model& model, const nlohmann::json& extra) {
  const auto tensors = model.named_tensors();
  io::write_bytes(out, kMagic);
  io::write_u32_le(out, kCheckpointVersion);
  io::write_u32_le(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, tensor] : tensors) {
    io::write_u32_le(out, static_cast<std::uint32_t>(name.size()));
    io::write_bytes(out, name);
    const nn::Shape& s = tensor->shape();
    io::write_u32_le(out, 4);
    for (int d : {s.n, s.c, s.h, s.w}) io::write_u32_le(out, static_cast<std::uint32_t>(d));
    io::write_f32_le(out, std::span<const float>(tensor->data(), tensor->size()));
  }
  const nlohmann::json meta = {{"architecture", config_to_json(model.config())}, {"extra", extra}};
  const std::string text = meta.dump();
  io::write_u32_le(out, static_cast<std::uint32_t>(text.size()));
  io::write_bytes(out, text);
}

void save_checkpoint(const std::filesystem::path& path, const Model& model, const nlohmann::json& extra) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint: " + path.string());
  write_checkpoint(out, model, extra);
  if (!out) throw Error("failed writing checkpoint: " + path.string());
}

LoadedCheckpoint read_checkpoint(std::istream& in) {
  if (io::read_string(in, 4, "checkpoint magic") != kMagic) throw LoadError("not a checkpoint (bad magic)");
  const auto version = io::read_u32_le(in, "checkpoint version");
  if (version != kCheckpointVersion) {
    throw LoadError("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                    std::to_string(kCheckpointVersion) + ")");
  }
  const auto count = io::read_u32_le(in, "tensor count");
  std::map<std::string, StoredTensor> stored;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = io::read_u32_le(in, "tensor name length");
    if (name_len > kMaxNameLength) throw LoadError("corrupt checkpoint: implausible tensor name length");
    const std::string name = io::read_string(in, name_len, "tensor name");
    const auto rank = io::read_u32_le(in, "tensor rank");
    if (rank < 1 || rank > 4) throw LoadError("tensor '" + name + "' has unsupported rank " + std::to_string(rank));
    int dims[4] = {1, 1, 1, 1};
    std::size_t total = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      const auto extent = io::read_u32_le(in, "tensor dims");
      if (extent == 0 || extent > (1U << 28)) throw LoadError("tensor '" + name + "' has an invalid extent");
      dims[4 - rank + d] = static_cast<int>(extent);
      total *= extent;
    }
    if (total > (1ULL << 30)) throw LoadError("tensor '" + name + "' is implausibly large");
    StoredTensor t{nn::Shape{dims[0], dims[1], dims[2], dims[3]}, std::vector<float>(total)};
    for (auto& v : t.values) v = io::read_f32_le(in, "tensor payload");
    if (!stored.emplace(name, std::move(t)).second) throw LoadError("duplicate tensor '" + name + "'");
  }
  const auto meta_len = io::read_u32_le(in, "metadata length");
  if (meta_len > kMaxMetadataLength) throw LoadError("corrupt checkpoint: implausible metadata length");
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(io::read_string(in, meta_len, "metadata"));
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("checkpoint metadata is not valid JSON: ") + e.what());
  }

  ArchitectureConfig config;
  try {
    config = config_from_json(meta.at("architecture"));
    config.validate();
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("checkpoint architecture block is invalid: ") + e.what());
  } catch (const ConfigError& e) {
    throw LoadError(std::string("checkpoint architecture block is invalid: ") + e.what());
  }

  LoadedCheckpoint loaded{build_model<float>(config), meta.value("extra", nlohmann::json::object())};
  auto targets = loaded.model.named_tensors();
  if (targets.size() != stored.size()) {
    throw LoadError("checkpoint holds " + std::to_string(stored.size()) + " tensors, architecture expects " +
                    std::to_string(targets.size()));
  }
  for (auto& [name, tensor] : targets) {
    const auto it = stored.find(name);
    if (it == stored.end()) throw LoadError("checkpoint is missing tensor '" + name + "'");
    if (!(it->second.shape == tensor->shape())) {
      throw LoadError("tensor '" + name + "' has shape " + it->second.shape.str() + ", expected " +
                      tensor->shape().str());
    }
    std::copy(it->second.values.begin(), it->second.values.end(), tensor->data());
  }
  return loaded;
}

LoadedCheckpoint load_checkpoint_with_metadata(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open checkpoint: " + path.string());
  try {
    return read_checkpoint(in);
  } catch (const LoadError& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
}

Model load_checkpoint(const std::filesystem::path& path) { return load_checkpoint_with_metadata(path).model; }

}  // namespace keyscope::models
