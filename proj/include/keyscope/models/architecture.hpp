#pragma once

#include <string>

namespace keyscope::models {

enum class ArchKind { KeyNet, AllConv };

std::string arch_name(ArchKind kind);
/// "keynet" or "allconv" (case-insensitive); throws ConfigError otherwise.
ArchKind parse_arch(const std::string& name);

struct ArchitectureConfig {
  ArchKind kind = ArchKind::AllConv;
  int n_feature_maps = 8;  // N_f
  double dropout_p = 0.0;
  int n_bins = 121;
  int n_classes = 24;
  /// KeyNet embedding width; 0 selects 2 * N_f.
  int embedding_dim = 0;

  int effective_embedding_dim() const { return embedding_dim > 0 ? embedding_dim : 2 * n_feature_maps; }

  /// Throws ConfigError for N_f < 1, dropout outside [0, 1), n_classes != 24 or bad widths.
  void validate() const;

  bool operator==(const ArchitectureConfig&) const = default;
};

/// Smallest (frames, bins) input the architecture accepts.
struct MinimumInput {
  int frames = 1;
  int bins = 1;
};

MinimumInput minimum_input(const ArchitectureConfig& config);

}  // namespace keyscope::models
