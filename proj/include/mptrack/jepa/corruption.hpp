// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <utility>
#include <vector>

#include <torch/torch.h>

#include "mptrack/common/rng.hpp"

namespace mptrack::jepa {

inline constexpr double kDefaultRhoMax = 0.2;

enum class CorruptionKind {
  kCopyPaste,  // target cells receive copies of source cells
  kMasking,    // target cells are zeroed (ablation only)
};

struct CorruptionLog {
  double rho = 0.0;
  int k = 0;
  std::vector<int> sources;  // row-major cell indices
  std::vector<int> targets;
};

/// Feature-space corruption of one [C, H, W] map. Draws rho ~ U(0, rho_max),
/// K = floor(rho * H * W), then K distinct source and K distinct target cells;
/// target[k] takes the pre-corruption vector of source[k].
std::pair<torch::Tensor, CorruptionLog> corrupt_features(
    const torch::Tensor& features, double rho_max, Rng& rng,
    CorruptionKind kind = CorruptionKind::kCopyPaste);

/// Independent corruption of every sample of a [B, C, H, W] batch.
torch::Tensor corrupt_batch(const torch::Tensor& features, double rho_max, Rng& rng,
                            CorruptionKind kind = CorruptionKind::kCopyPaste,
                            std::vector<CorruptionLog>* logs = nullptr);

}  // namespace mptrack::jepa
