// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "mptrack/trackhead/tracker_net.hpp"

#include "mptrack/common/error.hpp"
#include "mptrack/synthdata/labels.hpp"
#include "mptrack/trackhead/head_ops.hpp"

namespace mptrack::head {

LabelBatch encode_label_batch(std::span<const Box> boxes, const synth::GridSpec& grid) {
  std::vector<torch::Tensor> cls, reg, valid;
  for (const auto& box : boxes) {
    cls.push_back(synth::encode_cls_label(box, grid).values);
    auto r = synth::encode_reg_label(box, grid);
    reg.push_back(r.values);
    valid.push_back(r.valid_mask);
  }
  return {torch::stack(cls), torch::stack(reg), torch::stack(valid)};
}

void ReferenceSet::check(const ModelProfile& profile) const {
  const int64_t g = profile.grid;
  const int64_t c = profile.channels;
  require(features.dim() == 5 && features.size(1) == 2 && features.size(2) == c &&
              features.size(3) == g && features.size(4) == g,
          ErrorCategory::kShape, "reference features must be [B, 2, C, H, W]");
  const int64_t b = features.size(0);
  require(cls.sizes() == torch::IntArrayRef({b, 2, g, g}), ErrorCategory::kShape,
          "reference cls labels must be [B, 2, H, W]");
  require(reg.sizes() == torch::IntArrayRef({b, 2, 4, g, g}), ErrorCategory::kShape,
          "reference reg labels must be [B, 2, 4, H, W]");
  require(valid.sizes() == torch::IntArrayRef({b, 2, g, g}), ErrorCategory::kShape,
          "reference valid masks must be [B, 2, H, W]");
}

ReferenceSet ReferenceSet::index(int64_t b) const {
  return {features.slice(0, b, b + 1), cls.slice(0, b, b + 1), reg.slice(0, b, b + 1),
          valid.slice(0, b, b + 1)};
}

ReferenceSet make_reference_set(const torch::Tensor& features_a, const torch::Tensor& features_b,
                                std::span<const Box> boxes_a, std::span<const Box> boxes_b,
                                const synth::GridSpec& grid) {
  const auto a = encode_label_batch(boxes_a, grid);
  const auto b = encode_label_batch(boxes_b, grid);
  return {torch::stack({features_a, features_b}, 1), torch::stack({a.cls, b.cls}, 1),
          torch::stack({a.reg, b.reg}, 1), torch::stack({a.valid, b.valid}, 1)};
}

torch::Tensor image_tensor(const synth::Image& image) {
  auto bytes = torch::from_blob(const_cast<std::uint8_t*>(image.pixels.data()),
                                {1, image.height, image.width}, torch::kUInt8);
  return bytes.to(torch::kFloat32).div_(255.0f);
}

torch::Tensor image_batch(std::span<const synth::Image* const> images) {
  std::vector<torch::Tensor> out;
  out.reserve(images.size());
  for (const auto* img : images) out.push_back(image_tensor(*img));
  return torch::stack(out);
}

TrackerNetImpl::TrackerNetImpl(const ModelProfile& profile) : profile_(profile) {
  profile.validate();
  encoder_ = register_module("encoder", FrameEncoder(profile));
  label_encoder_ = register_module("label_encoder", LabelEncoder(5, profile.channels));
  predictor_ = register_module("predictor", ModelPredictor(profile));
  regdec_ = register_module("regdec", RegDec(profile.channels));
}

torch::Tensor TrackerNetImpl::encode_frame(const torch::Tensor& images) {
  return encoder_(images);
}

torch::Tensor TrackerNetImpl::encode_labels(const torch::Tensor& cls, const torch::Tensor& reg,
                                            const torch::Tensor& valid) {
  require(cls.dim() == 3 && reg.dim() == 4 && reg.size(1) == 4 &&
              cls.sizes() == valid.sizes() && reg.size(2) == cls.size(1) &&
              reg.size(3) == cls.size(2) && reg.size(0) == cls.size(0),
          ErrorCategory::kShape, "encode_labels: grid mismatch between cls, reg and mask");
  const auto masked = reg * valid.unsqueeze(1).to(reg.dtype());
  return label_encoder_(torch::cat({cls.unsqueeze(1), masked}, 1));
}

PredictorOutput TrackerNetImpl::predict_raw(const ReferenceSet& refs, const torch::Tensor& cur) {
  refs.check(profile_);
  const int64_t b = refs.features.size(0);
  const int64_t g = profile_.grid;
  const auto emb = encode_labels(refs.cls.reshape({2 * b, g, g}),
                                 refs.reg.reshape({2 * b, 4, g, g}),
                                 refs.valid.reshape({2 * b, g, g}))
                       .reshape({b, 2, profile_.channels, g, g});
  auto [omega, z] = predictor_(refs.features + emb, cur);
  return {omega, z};
}

PredictorOutput TrackerNetImpl::predict(const ReferenceSet& refs, const torch::Tensor& cur) {
  auto out = predict_raw(refs, cur);
  if (has_projnet()) out.omega = projnet_(out.omega);
  return out;
}

HeadMaps TrackerNetImpl::head(const torch::Tensor& omega, const torch::Tensor& z) {
  return {classify(omega, z), regress(regdec_, omega, z)};
}

void TrackerNetImpl::enable_projnet() {
  if (has_projnet()) return;
  projnet_ = register_module("projnet", torch::nn::Linear(profile_.channels, profile_.channels));
  torch::NoGradGuard no_grad;
  projnet_->weight.copy_(torch::eye(profile_.channels));
  projnet_->bias.zero_();
}

}  // namespace mptrack::head
