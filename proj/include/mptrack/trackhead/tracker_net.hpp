// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include <torch/torch.h>

#include "mptrack/synthdata/box.hpp"
#include "mptrack/synthdata/sequence.hpp"
#include "mptrack/trackhead/modules.hpp"

namespace mptrack::head {

/// Label maps for a batch of boxes.
struct LabelBatch {
  torch::Tensor cls;    // [N, H, W]
  torch::Tensor reg;    // [N, 4, H, W]
  torch::Tensor valid;  // [N, H, W] bool
};

LabelBatch encode_label_batch(std::span<const Box> boxes, const synth::GridSpec& grid);

/// Two reference frames with their labels, batched.
struct ReferenceSet {
  torch::Tensor features;  // [B, 2, C, H, W]
  torch::Tensor cls;       // [B, 2, H, W]
  torch::Tensor reg;       // [B, 2, 4, H, W]
  torch::Tensor valid;     // [B, 2, H, W]

  /// Throws kShape unless all grids agree and there are exactly two slots.
  void check(const ModelProfile& profile) const;
  ReferenceSet index(int64_t b) const;  // keeps the batch dimension
};

ReferenceSet make_reference_set(const torch::Tensor& features_a, const torch::Tensor& features_b,
                                std::span<const Box> boxes_a, std::span<const Box> boxes_b,
                                const synth::GridSpec& grid);

struct PredictorOutput {
  torch::Tensor omega;  // [B, C]
  torch::Tensor z;      // [B, C, H, W]
};

struct HeadMaps {
  torch::Tensor scores;  // [B, H, W]
  torch::Tensor ltrb;    // [B, 4, H, W]
};

/// Frames as a [N, 1, S, S] float tensor in [0, 1].
torch::Tensor image_batch(std::span<const synth::Image* const> images);
torch::Tensor image_tensor(const synth::Image& image);

/// Frame encoder, label encoder, model predictor, RegDec and an optional
/// linear ProjNet tail on the tracking model.
class TrackerNetImpl : public torch::nn::Module {
 public:
  explicit TrackerNetImpl(const ModelProfile& profile);

  const ModelProfile& profile() const { return profile_; }

  torch::Tensor encode_frame(const torch::Tensor& images);
  torch::Tensor encode_labels(const torch::Tensor& cls, const torch::Tensor& reg,
                              const torch::Tensor& valid);

  /// Predictor output before the ProjNet tail.
  PredictorOutput predict_raw(const ReferenceSet& refs, const torch::Tensor& cur);
  /// Predictor output with ProjNet applied when present.
  PredictorOutput predict(const ReferenceSet& refs, const torch::Tensor& cur);

  HeadMaps head(const torch::Tensor& omega, const torch::Tensor& z);

  /// Appends an identity-initialized C -> C ProjNet.
  void enable_projnet();
  bool has_projnet() const { return !projnet_.is_empty(); }

  FrameEncoder& encoder() { return encoder_; }
  LabelEncoder& label_encoder() { return label_encoder_; }
  ModelPredictor& predictor() { return predictor_; }
  RegDec& regdec() { return regdec_; }
  torch::nn::Linear& projnet() { return projnet_; }

 private:
  ModelProfile profile_;
  FrameEncoder encoder_{nullptr};
  LabelEncoder label_encoder_{nullptr};
  ModelPredictor predictor_{nullptr};
  RegDec regdec_{nullptr};
  torch::nn::Linear projnet_{nullptr};
};
TORCH_MODULE(TrackerNet);

}  // namespace mptrack::head
