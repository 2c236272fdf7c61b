// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "mptrack/occusolver/adapters.hpp"

#include "mptrack/common/error.hpp"

namespace mptrack::occu {

namespace F = torch::nn::functional;

PriorEncoderImpl::PriorEncoderImpl(const synth::GridSpec& grid, int64_t feature_dim)
    : grid_(grid) {
  encoder_ = register_module("encoder", head::LabelEncoder(1, feature_dim, true));
}

torch::Tensor PriorEncoderImpl::forward(const torch::Tensor& prior, int64_t h, int64_t w) {
  require(prior.dim() == 3 && prior.size(1) == grid_.height && prior.size(2) == grid_.width,
          ErrorCategory::kShape,
          "inject_prior: prior must be [B, " + std::to_string(grid_.height) + ", " +
              std::to_string(grid_.width) + "]");
  auto emb = encoder_(prior.unsqueeze(1));
  return F::interpolate(emb, F::InterpolateFuncOptions()
                                 .size(std::vector<int64_t>{h, w})
                                 .mode(torch::kBilinear)
                                 .align_corners(false));
}

torch::Tensor inject_prior(PriorEncoder& encoder, const torch::Tensor& frame_features,
                           const torch::Tensor& prior) {
  require(frame_features.dim() == 4 && prior.size(0) == frame_features.size(0),
          ErrorCategory::kShape, "inject_prior: batch mismatch");
  return frame_features + encoder(prior, frame_features.size(2), frame_features.size(3));
}

torch::Tensor inject_window_priors(PriorEncoder& encoder, const torch::Tensor& window_features,
                                   const torch::Tensor& prior_first,
                                   const torch::Tensor& prior_middle) {
  require(window_features.dim() == 5, ErrorCategory::kShape,
          "inject_prior: window features must be [B, T, F, h, w]");
  const int t = static_cast<int>(window_features.size(1));
  const int mid = middle_frame_index(t);
  std::vector<torch::Tensor> frames;
  for (int i = 0; i < t; ++i) {
    auto f = window_features.select(1, i);
    if (i == 0) f = inject_prior(encoder, f, prior_first);
    else if (i == mid) f = inject_prior(encoder, f, prior_middle);
    frames.push_back(f);
  }
  return torch::stack(frames, 1);
}

LightTransImpl::LightTransImpl(int64_t feature_dim, int64_t reduced_dim, int64_t window,
                               int64_t heads, int64_t layers)
    : reduced_(reduced_dim) {
  reduce_ = register_module("reduce", torch::nn::Linear(feature_dim, reduced_dim));
  time_embed_ = register_parameter("time_embed", torch::randn({window, reduced_dim}) * 0.02);
  encoder_ = register_module("encoder",
                             nn::TransformerEncoder(reduced_dim, heads, layers, 2 * reduced_dim));
}

torch::Tensor LightTransImpl::forward(const torch::Tensor& q) {
  const auto b = q.size(0);
  const auto p = q.size(1);
  const auto t = q.size(2);
  auto x = reduce_(q.reshape({b * p, t, q.size(3)})) + time_embed_.unsqueeze(0);
  return encoder_(x).view({b, p, t, reduced_});
}

ScaleNetImpl::ScaleNetImpl(int64_t reduced_dim, int64_t feature_dim) {
  fc1_ = register_module("fc1", torch::nn::Linear(reduced_dim, reduced_dim));
  fc2_ = register_module("fc2", torch::nn::Linear(reduced_dim, feature_dim));
  torch::NoGradGuard no_grad;
  fc2_->weight.zero_();
  fc2_->bias.zero_();
}

torch::Tensor ScaleNetImpl::forward(const torch::Tensor& x) {
  return fc2_(torch::gelu(fc1_(x)));
}

torch::Tensor ladder_refine(LightTrans& light, ScaleNet& scale,
                            const std::vector<torch::Tensor>& q_history,
                            const torch::Tensor& delta_q) {
  require(!q_history.empty(), ErrorCategory::kDomain, "ladder_refine: empty Q history");
  torch::Tensor sum;
  for (const auto& q : q_history) {
    auto r = light(q);
    sum = sum.defined() ? sum + r : r;
  }
  return scale(sum) + delta_q;
}

VisHeadImpl::VisHeadImpl(int64_t feature_dim) {
  linear_ = register_module("linear", torch::nn::Linear(feature_dim, 1));
  fc1_ = register_module("fc1", torch::nn::Linear(feature_dim, feature_dim));
  fc2_ = register_module("fc2", torch::nn::Linear(feature_dim, 1));
  torch::NoGradGuard no_grad;
  fc2_->weight.zero_();
  fc2_->bias.zero_();
}

void VisHeadImpl::init_from(const torch::nn::Linear& frozen_head) {
  torch::NoGradGuard no_grad;
  linear_->weight.copy_(frozen_head->weight);
  linear_->bias.copy_(frozen_head->bias);
}

torch::Tensor VisHeadImpl::forward(const torch::Tensor& q) {
  auto logit = linear_(q) + fc2_(torch::relu(fc1_(q)));
  return torch::sigmoid(logit.squeeze(-1));
}

FusionImpl::FusionImpl(int64_t num_points, int64_t channels, int64_t grid_h, int64_t grid_w,
                       int64_t heads, int64_t layers)
    : channels_(channels), grid_h_(grid_h), grid_w_(grid_w) {
  project_ = register_module("project", torch::nn::Conv2d(torch::nn::Conv2dOptions(
                                            num_points, channels, 1)));
  pos_embed_ = register_parameter("pos_embed", torch::randn({grid_h * grid_w, channels}) * 0.02);
  energy_embed_ = register_parameter("energy_embed", torch::randn({channels}) * 0.02);
  z_embed_ = register_parameter("z_embed", torch::randn({channels}) * 0.02);
  encoder_ = register_module("encoder",
                             nn::TransformerEncoder(channels, heads, layers, 2 * channels));
}

torch::Tensor FusionImpl::forward(const torch::Tensor& energy, const torch::Tensor& z_cur) {
  require(energy.dim() == 4 && z_cur.dim() == 4 && energy.size(2) == grid_h_ &&
              energy.size(3) == grid_w_ && z_cur.size(2) == grid_h_ && z_cur.size(3) == grid_w_ &&
              z_cur.size(1) == channels_ && energy.size(0) == z_cur.size(0),
          ErrorCategory::kShape, "fuse_visibility: energy and z_cur grids must match");
  const auto b = z_cur.size(0);
  const auto n = grid_h_ * grid_w_;
  auto e_tok = project_(energy).flatten(2).transpose(1, 2) + pos_embed_ + energy_embed_;
  auto z_tok = z_cur.flatten(2).transpose(1, 2) + pos_embed_ + z_embed_;
  auto out = encoder_(torch::cat({e_tok, z_tok}, 1));
  return out.narrow(1, 0, n).transpose(1, 2).reshape({b, channels_, grid_h_, grid_w_});
}

EnsembleImpl::EnsembleImpl(int64_t channels) {
  mix_ = register_module("mix", torch::nn::Conv2d(torch::nn::Conv2dOptions(2 * channels,
                                                                           channels, 1)));
  torch::NoGradGuard no_grad;
  mix_->weight.zero_();
  mix_->bias.zero_();
}

torch::Tensor EnsembleImpl::forward(const torch::Tensor& e_tilde, const torch::Tensor& z_cur) {
  require(e_tilde.sizes() == z_cur.sizes(), ErrorCategory::kShape,
          "ensemble: E_tilde and z_cur grids must match");
  return z_cur + mix_(torch::cat({e_tilde, z_cur}, 1));
}

}  // namespace mptrack::occu
