#pragma once

#include <cstdint>

#include "keyscope/models/architecture.hpp"

namespace keyscope::training {

struct TimingConfig {
  int piece_frames = 600;
  int snippet_frames = 100;
  int batch_size = 4;
  int updates = 50;
  int warmup = 2;
  std::uint64_t seed = 0;
};

struct TimingReport {
  double full_ms_per_update = 0.0;
  double snippet_ms_per_update = 0.0;
  double ratio = 0.0;  // snippet / full
  std::size_t full_activation_bytes = 0;
  std::size_t snippet_activation_bytes = 0;
};

/// Mean wall time of one gradient update on whole-piece batches versus snippet
/// batches of the same size, plus the activation memory each holds for backward.
TimingReport full_vs_snippet_timing(const models::ArchitectureConfig& model, const TimingConfig& config = {});

}  // namespace keyscope::training
