// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <torch/torch.h>

namespace mptrack::metrics {

inline constexpr double kHingeTargetThreshold = 0.05;

/// Compound hinge classification loss. Cells where the label exceeds
/// `target_threshold` regress to the label; all other cells are penalized
/// only for positive scores. Returns the mean squared residual.
/// `scores` and `labels` share any shape (typically [B, H, W]).
torch::Tensor hinge_cls_loss(const torch::Tensor& scores, const torch::Tensor& labels,
                             double target_threshold = kHingeTargetThreshold);

/// Per-row 1 - GIoU for [N, 4] corner boxes (x0, y0, x1, y1). Returns [N].
torch::Tensor giou_loss_rows(const torch::Tensor& pred, const torch::Tensor& gt);

/// Dense GIoU regression loss on ltrb maps: `pred_ltrb` and `gt_ltrb` are
/// [B, 4, H, W] distances in stride units, `valid` is [B, H, W] bool. The
/// loss is the mean of 1 - GIoU over valid cells (0 when none are valid).
torch::Tensor ltrb_giou_loss(const torch::Tensor& pred_ltrb, const torch::Tensor& gt_ltrb,
                             const torch::Tensor& valid);

}  // namespace mptrack::metrics
