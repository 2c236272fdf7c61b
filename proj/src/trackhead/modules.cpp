// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "mptrack/trackhead/modules.hpp"

#include "mptrack/common/error.hpp"

namespace mptrack::head {

namespace F = torch::nn::functional;
using torch::nn::Conv2dOptions;

FrameEncoderImpl::FrameEncoderImpl(const ModelProfile& profile) : profile_(profile) {
  profile.validate();
  const int64_t half = profile.stride() / 2;
  const int64_t c = profile.channels;
  conv1_ = register_module("conv1", torch::nn::Conv2d(Conv2dOptions(1, 16, 2).stride(2)));
  conv2_ = register_module("conv2", torch::nn::Conv2d(Conv2dOptions(16, 48, half).stride(half)));
  conv3_ = register_module("conv3", torch::nn::Conv2d(Conv2dOptions(48, c, 3).padding(1)));
  conv4_ = register_module("conv4", torch::nn::Conv2d(Conv2dOptions(c, c, 3).padding(1)));
}

torch::Tensor FrameEncoderImpl::forward(const torch::Tensor& images) {
  require(images.dim() == 4 && images.size(1) == 1 && images.size(2) == profile_.image_size &&
              images.size(3) == profile_.image_size,
          ErrorCategory::kShape,
          "encode_frame: expected [B, 1, " + std::to_string(profile_.image_size) + ", " +
              std::to_string(profile_.image_size) + "] images");
  auto x = torch::relu(conv1_(images - 0.5));
  x = torch::relu(conv2_(x));
  x = torch::relu(conv3_(x));
  return conv4_(x);
}

int FrameEncoderImpl::receptive_field(const ModelProfile& profile) {
  const int s = profile.stride();
  return 2 + (s / 2 - 1) * 2 + 2 * 2 * s;
}

LabelEncoderImpl::LabelEncoderImpl(int64_t in_channels, int64_t out_channels,
                                   bool zero_init_output)
    : in_channels_(in_channels) {
  conv1_ = register_module(
      "conv1", torch::nn::Conv2d(Conv2dOptions(in_channels, out_channels, 3).padding(1)));
  conv2_ = register_module("conv2",
                           torch::nn::Conv2d(Conv2dOptions(out_channels, out_channels, 1)));
  if (zero_init_output) {
    torch::NoGradGuard no_grad;
    conv2_->weight.zero_();
    conv2_->bias.zero_();
  }
}

torch::Tensor LabelEncoderImpl::forward(const torch::Tensor& labels) {
  require(labels.dim() == 4 && labels.size(1) == in_channels_, ErrorCategory::kShape,
          "encode_labels: expected [B, " + std::to_string(in_channels_) + ", H, W] labels");
  return conv2_(torch::relu(conv1_(labels)));
}

ModelPredictorImpl::ModelPredictorImpl(const ModelProfile& profile, int64_t layers,
                                       int64_t heads)
    : profile_(profile) {
  const int64_t c = profile.channels;
  const int64_t cells = static_cast<int64_t>(profile.grid) * profile.grid;
  pos_embed_ = register_parameter("pos_embed", torch::randn({1, cells, c}) * 0.02);
  ref_embed_ = register_parameter("ref_embed", torch::randn({1, 1, c}) * 0.02);
  cur_embed_ = register_parameter("cur_embed", torch::randn({1, 1, c}) * 0.02);
  query_ = register_parameter("query", torch::randn({1, 1, c}) * 0.02);
  encoder_ = register_module("encoder", nn::TransformerEncoder(c, heads, layers, 2 * c));
  omega_head_ = register_module("omega_head", torch::nn::Linear(c, c));
}

std::pair<torch::Tensor, torch::Tensor> ModelPredictorImpl::forward(
    const torch::Tensor& ref_tokens, const torch::Tensor& cur) {
  const int64_t c = profile_.channels;
  const int64_t g = profile_.grid;
  require(cur.dim() == 4 && cur.size(1) == c && cur.size(2) == g && cur.size(3) == g,
          ErrorCategory::kShape, "predict_model: current features must be [B, C, H, W]");
  require(ref_tokens.dim() == 5 && ref_tokens.size(0) == cur.size(0) && ref_tokens.size(1) == 2 &&
              ref_tokens.size(2) == c && ref_tokens.size(3) == g && ref_tokens.size(4) == g,
          ErrorCategory::kShape, "predict_model: references must be [B, 2, C, H, W]");
  const int64_t b = cur.size(0);
  const int64_t cells = g * g;
  auto flatten = [&](const torch::Tensor& fmap) {
    return fmap.reshape({b, c, cells}).transpose(1, 2);
  };
  const auto ref_a = flatten(ref_tokens.select(1, 0)) + pos_embed_ + ref_embed_;
  const auto ref_b = flatten(ref_tokens.select(1, 1)) + pos_embed_ + ref_embed_;
  const auto current = flatten(cur) + pos_embed_ + cur_embed_;
  const auto query = query_.expand({b, 1, c});
  const auto tokens = torch::cat({query, ref_a, ref_b, current}, 1);
  const auto out = encoder_(tokens);
  const auto omega = omega_head_(out.select(1, 0));
  const auto z = out.slice(1, 1 + 2 * cells).transpose(1, 2).reshape({b, c, g, g});
  return {omega, z};
}

RegDecImpl::RegDecImpl(int64_t channels) {
  branches_ = register_module("branches", torch::nn::ModuleList());
  for (int k = 0; k < 4; ++k) {
    torch::nn::Sequential branch(
        torch::nn::Conv2d(Conv2dOptions(channels, channels / 2, 3).padding(1)),
        torch::nn::ReLU(),
        torch::nn::Conv2d(Conv2dOptions(channels / 2, 1, 3).padding(1)));
    branches_->push_back(branch);
  }
}

torch::Tensor RegDecImpl::forward(const torch::Tensor& x) {
  std::vector<torch::Tensor> maps;
  for (const auto& branch : *branches_) {
    maps.push_back(branch->as<torch::nn::Sequential>()->forward(x));
  }
  return F::softplus(torch::cat(maps, 1));
}

}  // namespace mptrack::head
