// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <torch/torch.h>

#include "mptrack/synthdata/box.hpp"
#include "mptrack/trackhead/modules.hpp"

namespace mptrack::head {

/// Score map p[b, i, j] = sum_c omega[b, c] * z[b, c, i, j], i.e. a 1x1
/// convolution of the tracking model over the features. [B, H, W].
torch::Tensor classify(const torch::Tensor& omega, const torch::Tensor& z);

/// RegDec input: the score map broadcast-multiplied over every channel of z.
/// [B, C, H, W].
torch::Tensor modulate(const torch::Tensor& omega, const torch::Tensor& z);

/// ltrb map [B, 4, H, W] from RegDec applied to modulate(omega, z).
torch::Tensor regress(RegDec& regdec, const torch::Tensor& omega, const torch::Tensor& z);

struct DecodedBox {
  Box box;
  double peak_score = 0.0;
  int row = 0;
  int col = 0;
};

/// Box at the argmax cell of `scores` [H, W] (first maximum in row-major
/// order), offset from that cell's center by ltrb [4, H, W] times stride.
DecodedBox decode_box(const torch::Tensor& scores, const torch::Tensor& ltrb, int stride);

}  // namespace mptrack::head
