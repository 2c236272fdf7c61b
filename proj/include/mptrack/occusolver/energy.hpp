// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <torch/torch.h>

#include "mptrack/synthdata/labels.hpp"

namespace mptrack::occu {

inline constexpr double kVisibilityThreshold = 0.5;
inline constexpr double kDefaultEnergySigma = 1.0;  // cells

/// coords [B, P, 2] px, visible [B, P] bool -> [B, P, H, W] in [0, 1]. A
/// visible point contributes a unit-peak Gaussian at its grid location, an
/// invisible one the complement. Out-of-image coordinates are clamped to
/// the border; the number of clamped points is added to `clamped`.
torch::Tensor map_points_to_energy(const torch::Tensor& coords, const torch::Tensor& visible,
                                   const synth::GridSpec& grid,
                                   double sigma = kDefaultEnergySigma, int* clamped = nullptr);

inline torch::Tensor binarize_visibility(const torch::Tensor& prob) {
  return prob > kVisibilityThreshold;
}

}  // namespace mptrack::occu
