#pragma once

#include <cstddef>
#include <string>

namespace keyscope::testing {

// Layer tokens written out by hand: every conv is followed by batch norm,
// dropout is feature-map dropout, and the final 1x1 classifier conv has no ELU.
inline std::string golden_allconv(int nf) {
  const auto n = [](int v) { return std::to_string(v); };
  return "Conv5x5(" + n(nf) + ") BN ELU Conv3x3(" + n(nf) + ") BN ELU MaxPool2x2 Dropout " +
         "Conv3x3(" + n(2 * nf) + ") BN ELU Conv3x3(" + n(2 * nf) + ") BN ELU MaxPool2x2 Dropout " +
         "Conv3x3(" + n(4 * nf) + ") BN ELU Conv3x3(" + n(4 * nf) + ") BN ELU MaxPool2x2 Dropout " +
         "Conv3x3(" + n(8 * nf) + ") BN ELU Dropout " +
         "Conv3x3(" + n(8 * nf) + ") BN ELU Dropout " +
         "Conv1x1(24) BN GlobalAvgPool Softmax";
}

inline std::string golden_keynet(int nf) {
  std::string s;
  for (int i = 0; i < 5; ++i) s += "Conv5x5(" + std::to_string(nf) + ") BN ELU Dropout ";
  return s + "Dense(" + std::to_string(2 * nf) + ") ELU TimeAvgPool Dense(24) Softmax";
}

// Closed-form parameter counts, independent of the layer objects.
inline std::size_t conv_params(int in, int out, int k) { return static_cast<std::size_t>(k * k * in * out + out + 2 * out); }

inline std::size_t allconv_params_oracle(int nf) {
  return conv_params(1, nf, 5) + conv_params(nf, nf, 3) + conv_params(nf, 2 * nf, 3) + conv_params(2 * nf, 2 * nf, 3) +
         conv_params(2 * nf, 4 * nf, 3) + conv_params(4 * nf, 4 * nf, 3) + conv_params(4 * nf, 8 * nf, 3) +
         conv_params(8 * nf, 8 * nf, 3) + conv_params(8 * nf, 24, 1);
}

inline std::size_t keynet_params_oracle(int nf, int embedding, int bins) {
  std::size_t total = conv_params(1, nf, 5);
  for (int i = 0; i < 4; ++i) total += conv_params(nf, nf, 5);
  total += static_cast<std::size_t>(nf * bins * embedding + embedding);
  total += static_cast<std::size_t>(embedding * 24 + 24);
  return total;
}

}  // namespace keyscope::testing
