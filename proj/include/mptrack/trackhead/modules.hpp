// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <torch/torch.h>

#include "mptrack/nn/transformer.hpp"
#include "mptrack/trackhead/profile.hpp"

namespace mptrack::head {

/// Small strided CNN standing in for a frozen ViT backbone.
/// [B, 1, S, S] images in [0, 1] -> [B, C, G, G] features.
///
/// Layers: 2x2/2 -> (s/2)x(s/2)/(s/2) -> 3x3 -> 3x3, so the receptive field
/// of one output cell is 2 + (s/2 - 1) * 2 + 2 * 2 * s px wide.
class FrameEncoderImpl : public torch::nn::Module {
 public:
  explicit FrameEncoderImpl(const ModelProfile& profile);

  torch::Tensor forward(const torch::Tensor& images);

  /// Receptive-field width (px) and jump (px) of one output cell.
  static int receptive_field(const ModelProfile& profile);

 private:
  ModelProfile profile_;
  torch::nn::Conv2d conv1_{nullptr};
  torch::nn::Conv2d conv2_{nullptr};
  torch::nn::Conv2d conv3_{nullptr};
  torch::nn::Conv2d conv4_{nullptr};
};
TORCH_MODULE(FrameEncoder);

/// Convolutional label (prior) encoder: [B, in, H, W] label maps ->
/// [B, C, H, W] embedding that is added to frame features.
class LabelEncoderImpl : public torch::nn::Module {
 public:
  LabelEncoderImpl(int64_t in_channels, int64_t out_channels, bool zero_init_output = false);

  torch::Tensor forward(const torch::Tensor& labels);

 private:
  int64_t in_channels_;
  torch::nn::Conv2d conv1_{nullptr};
  torch::nn::Conv2d conv2_{nullptr};
};
TORCH_MODULE(LabelEncoder);

/// Transformer model predictor. Tokens are [query | ref_a | ref_b | cur];
/// the query output is read out as the tracking model, the cur outputs as
/// the refined current-frame features.
class ModelPredictorImpl : public torch::nn::Module {
 public:
  explicit ModelPredictorImpl(const ModelProfile& profile, int64_t layers = 2,
                              int64_t heads = 4);

  /// ref_tokens: [B, 2, C, H, W] reference features with label embeddings
  /// already added; cur: [B, C, H, W]. Returns {omega [B, C], z [B, C, H, W]}.
  std::pair<torch::Tensor, torch::Tensor> forward(const torch::Tensor& ref_tokens,
                                                  const torch::Tensor& cur);

 private:
  ModelProfile profile_;
  torch::Tensor pos_embed_;
  torch::Tensor ref_embed_;
  torch::Tensor cur_embed_;
  torch::Tensor query_;
  nn::TransformerEncoder encoder_{nullptr};
  torch::nn::Linear omega_head_{nullptr};
};
TORCH_MODULE(ModelPredictor);

/// Four independent conv branches producing non-negative (l, t, r, b) maps.
class RegDecImpl : public torch::nn::Module {
 public:
  explicit RegDecImpl(int64_t channels);

  /// [B, C, H, W] -> [B, 4, H, W]
  torch::Tensor forward(const torch::Tensor& x);

 private:
  torch::nn::ModuleList branches_;
};
TORCH_MODULE(RegDec);

}  // namespace mptrack::head
