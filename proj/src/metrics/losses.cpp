// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "mptrack/metrics/losses.hpp"

#include "mptrack/common/error.hpp"

namespace mptrack::metrics {

torch::Tensor hinge_cls_loss(const torch::Tensor& scores, const torch::Tensor& labels,
                             double target_threshold) {
  require(scores.sizes() == labels.sizes(), ErrorCategory::kShape,
          "hinge_cls_loss: score/label grid mismatch");
  const auto target_region = labels > target_threshold;
  const auto residual =
      torch::where(target_region, scores - labels, torch::clamp_min(scores, 0.0));
  return residual.square().mean();
}

torch::Tensor giou_loss_rows(const torch::Tensor& pred, const torch::Tensor& gt) {
  require(pred.dim() == 2 && pred.size(1) == 4 && pred.sizes() == gt.sizes(),
          ErrorCategory::kShape, "giou_loss_rows: expected matching [N, 4] boxes");
  const auto px0 = pred.select(1, 0), py0 = pred.select(1, 1);
  const auto px1 = pred.select(1, 2), py1 = pred.select(1, 3);
  const auto gx0 = gt.select(1, 0), gy0 = gt.select(1, 1);
  const auto gx1 = gt.select(1, 2), gy1 = gt.select(1, 3);
  const auto pred_area = (px1 - px0) * (py1 - py0);
  const auto gt_area = (gx1 - gx0) * (gy1 - gy0);
  const auto iw = (torch::minimum(px1, gx1) - torch::maximum(px0, gx0)).clamp_min(0.0);
  const auto ih = (torch::minimum(py1, gy1) - torch::maximum(py0, gy0)).clamp_min(0.0);
  const auto inter = iw * ih;
  const auto uni = pred_area + gt_area - inter;
  const auto enclosing = (torch::maximum(px1, gx1) - torch::minimum(px0, gx0)) *
                         (torch::maximum(py1, gy1) - torch::minimum(py0, gy0));
  const auto giou = inter / uni - (enclosing - uni) / enclosing;
  return 1.0 - giou;
}

torch::Tensor ltrb_giou_loss(const torch::Tensor& pred_ltrb, const torch::Tensor& gt_ltrb,
                             const torch::Tensor& valid) {
  require(pred_ltrb.sizes() == gt_ltrb.sizes() && pred_ltrb.dim() == 4 &&
              pred_ltrb.size(1) == 4,
          ErrorCategory::kShape, "ltrb_giou_loss: expected matching [B, 4, H, W] maps");
  require(valid.dim() == 3 && valid.size(0) == pred_ltrb.size(0) &&
              valid.size(1) == pred_ltrb.size(2) && valid.size(2) == pred_ltrb.size(3),
          ErrorCategory::kShape, "ltrb_giou_loss: valid mask must be [B, H, W]");
  // Boxes relative to each cell center: (-l, -t, r, b).
  auto to_rows = [](const torch::Tensor& ltrb) {
    const auto rows = ltrb.permute({0, 2, 3, 1}).reshape({-1, 4});
    return torch::stack({-rows.select(1, 0), -rows.select(1, 1), rows.select(1, 2),
                         rows.select(1, 3)},
                        1);
  };
  const auto mask = valid.reshape({-1});
  if (mask.sum().item<int64_t>() == 0) return pred_ltrb.sum() * 0.0;
  const auto pred = to_rows(pred_ltrb).index({mask});
  const auto gt = to_rows(gt_ltrb).index({mask});
  return giou_loss_rows(pred, gt).mean();
}

}  // namespace mptrack::metrics
