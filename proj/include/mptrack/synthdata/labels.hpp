// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <torch/torch.h>

#include "mptrack/synthdata/box.hpp"

namespace mptrack::synth {

/// H x W classification target in [0, 1] (float32).
struct ScoreMapLabel {
  torch::Tensor values;
};

/// Per-cell (l, t, r, b) distances to the box edges in stride units,
/// layout [4, H, W], plus a [H, W] bool mask of cells whose centers lie in
/// the box. Values are signed; only masked cells are supervised.
struct RegMapLabel {
  torch::Tensor values;
  torch::Tensor valid_mask;
};

struct GridSpec {
  int height = 18;
  int width = 18;
  int stride = 14;
};

inline constexpr double kDefaultLabelSigma = 1.0;

/// Cell-center coordinate in pixels for grid index `index`.
inline double cell_center(int index, int stride) { return (index + 0.5) * stride; }

/// Isotropic Gaussian (in cell units) around the box center, rescaled so its
/// maximum over the grid is exactly 1.
ScoreMapLabel encode_cls_label(const Box& box, const GridSpec& grid,
                               double sigma = kDefaultLabelSigma);

RegMapLabel encode_reg_label(const Box& box, const GridSpec& grid);

}  // namespace mptrack::synth
