// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "mptrack/trackhead/head_ops.hpp"

#include "mptrack/common/error.hpp"
#include "mptrack/synthdata/labels.hpp"

namespace mptrack::head {
namespace {

void check_model(const torch::Tensor& omega, const torch::Tensor& z, const char* op) {
  require(omega.dim() == 2 && z.dim() == 4 && omega.size(0) == z.size(0),
          ErrorCategory::kShape, std::string(op) + ": expected omega [B, C] and z [B, C, H, W]");
  require(omega.size(1) == z.size(1), ErrorCategory::kShape,
          std::string(op) + ": channel mismatch (" + std::to_string(omega.size(1)) + " vs " +
              std::to_string(z.size(1)) + ")");
}

}  // namespace

torch::Tensor classify(const torch::Tensor& omega, const torch::Tensor& z) {
  check_model(omega, z, "classify");
  return torch::einsum("bc,bchw->bhw", {omega, z});
}

torch::Tensor modulate(const torch::Tensor& omega, const torch::Tensor& z) {
  check_model(omega, z, "regress");
  return classify(omega, z).unsqueeze(1) * z;
}

torch::Tensor regress(RegDec& regdec, const torch::Tensor& omega, const torch::Tensor& z) {
  return regdec(modulate(omega, z));
}

DecodedBox decode_box(const torch::Tensor& scores, const torch::Tensor& ltrb, int stride) {
  require(scores.dim() == 2 && ltrb.dim() == 3 && ltrb.size(0) == 4 &&
              ltrb.size(1) == scores.size(0) && ltrb.size(2) == scores.size(1),
          ErrorCategory::kShape, "decode_box: expected scores [H, W] and ltrb [4, H, W]");
  const auto p = scores.detach().to(torch::kFloat64).contiguous();
  const auto d = ltrb.detach().to(torch::kFloat64).contiguous();
  const auto pa = p.accessor<double, 2>();
  const auto da = d.accessor<double, 3>();
  DecodedBox out;
  out.peak_score = pa[0][0];
  for (int i = 0; i < p.size(0); ++i) {
    for (int j = 0; j < p.size(1); ++j) {
      if (pa[i][j] > out.peak_score) {
        out.peak_score = pa[i][j];
        out.row = i;
        out.col = j;
      }
    }
  }
  const double cx = synth::cell_center(out.col, stride);
  const double cy = synth::cell_center(out.row, stride);
  out.box = {cx - da[0][out.row][out.col] * stride, cy - da[1][out.row][out.col] * stride,
             cx + da[2][out.row][out.col] * stride, cy + da[3][out.row][out.col] * stride};
  return out;
}

}  // namespace mptrack::head
