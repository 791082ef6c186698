#include "keyscope/models/architecture.hpp"

#include <algorithm>
#include <cctype>

#include "keyscope/error.hpp"

namespace keyscope::models {

std::string arch_name(ArchKind kind) { return kind == ArchKind::KeyNet ? "keynet" : "allconv"; }

ArchKind parse_arch(const std::string& name) {
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "keynet") return ArchKind::KeyNet;
  if (lower == "allconv") return ArchKind::AllConv;
  throw ConfigError("unknown architecture '" + name + "' (expected keynet or allconv)");
}

void ArchitectureConfig::validate() const {
  if (n_feature_maps < 1) throw ConfigError("N_f must be >= 1, got " + std::to_string(n_feature_maps));
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) {
    throw ConfigError("dropout probability must be in [0, 1), got " + std::to_string(dropout_p));
  }
  if (n_classes != 24) throw ConfigError("key classifiers have 24 classes, got " + std::to_string(n_classes));
  if (n_bins < 1) throw ConfigError("n_bins must be >= 1");
  if (embedding_dim < 0) throw ConfigError("embedding_dim must be >= 0 (0 selects 2 * N_f)");
}

MinimumInput minimum_input(const ArchitectureConfig& config) {
  // Three 2x2 poolings need 8 x 8; KeyNet's frame-wise layers take any length.
  if (config.kind == ArchKind::AllConv) return {8, 8};
  return {1, config.n_bins};
}

}  // namespace keyscope::models
