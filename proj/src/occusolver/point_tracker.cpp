// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "mptrack/occusolver/point_tracker.hpp"

#include <cmath>

#include "mptrack/common/error.hpp"
#include "mptrack/nn/transformer.hpp"

namespace mptrack::occu {

namespace F = torch::nn::functional;

void PointTrackerConfig::validate() const {
  require(feature_dim > 0, ErrorCategory::kConfig, "point tracker: feature_dim must be > 0");
  require(token_dim > 0 && token_dim % heads == 0, ErrorCategory::kConfig,
          "point tracker: token_dim must be a positive multiple of heads");
  require(iterations >= 0, ErrorCategory::kConfig, "point tracker: iterations must be >= 0");
  require(corr_radius >= 0, ErrorCategory::kConfig, "point tracker: corr_radius must be >= 0");
  require(window >= 1, ErrorCategory::kConfig, "point tracker: window must be >= 1");
}

torch::Tensor sample_query_offsets(int n, Rng& rng) {
  require(n >= 1, ErrorCategory::kDomain, "sample_query_points: n must be >= 1");
  auto out = torch::empty({n, 2}, torch::kFloat32);
  auto acc = out.accessor<float, 2>();
  for (int i = 0; i < n; ++i) {
    acc[i][0] = static_cast<float>(uniform(rng, 0.0, 1.0));
    acc[i][1] = static_cast<float>(uniform(rng, 0.0, 1.0));
  }
  return out;
}

torch::Tensor offsets_to_points(const torch::Tensor& offsets, const Box& box) {
  auto scale = torch::tensor({static_cast<float>(box.width()), static_cast<float>(box.height())});
  auto origin = torch::tensor({static_cast<float>(box.x0), static_cast<float>(box.y0)});
  return offsets * scale + origin;
}

torch::Tensor sample_query_points(const Box& box, int n, Rng& rng) {
  require(box.width() > 0.0 && box.height() > 0.0, ErrorCategory::kDomain,
          "sample_query_points: degenerate box");
  return offsets_to_points(sample_query_offsets(n, rng), box);
}

PointTrackerImpl::PointTrackerImpl(const PointTrackerConfig& config) : config_(config) {
  config_.validate();
  const int64_t f = config_.feature_dim;
  const int64_t d = config_.token_dim;
  const int64_t r = config_.corr_radius;
  const int64_t k = (2 * r + 1) * (2 * r + 1);
  conv1_ = register_module("conv1", torch::nn::Conv2d(torch::nn::Conv2dOptions(1, 16, 2).stride(2)));
  conv2_ = register_module(
      "conv2", torch::nn::Conv2d(torch::nn::Conv2dOptions(16, f, 3).stride(2).padding(1)));
  conv3_ = register_module("conv3",
                           torch::nn::Conv2d(torch::nn::Conv2dOptions(f, f, 3).padding(1)));
  embed_ = register_module("embed", torch::nn::Linear(k + 2 + f, d));
  time_embed_ = register_parameter("time_embed", torch::randn({config_.window, d}) * 0.02);
  time_blocks_ = register_module("time_blocks", torch::nn::ModuleList());
  point_blocks_ = register_module("point_blocks", torch::nn::ModuleList());
  for (int i = 0; i < 2; ++i) {
    time_blocks_->push_back(nn::TransformerBlock(d, config_.heads, 2 * d));
    point_blocks_->push_back(nn::TransformerBlock(d, config_.heads, 2 * d));
  }
  norm_ = register_module("norm", torch::nn::LayerNorm(torch::nn::LayerNormOptions({d})));
  coord_head_ = register_module("coord_head", torch::nn::Linear(d, 2));
  q_head_ = register_module("q_head", torch::nn::Linear(d, f));
  vis_head_ = register_module("vis_head", torch::nn::Linear(f, 1));
  {
    torch::NoGradGuard no_grad;
    coord_head_->weight.mul_(0.1);
    coord_head_->bias.zero_();
    q_head_->weight.mul_(0.1);
    q_head_->bias.zero_();
  }
  std::vector<float> offs;
  for (int64_t dy = -r; dy <= r; ++dy) {
    for (int64_t dx = -r; dx <= r; ++dx) {
      offs.push_back(static_cast<float>(dx));
      offs.push_back(static_cast<float>(dy));
    }
  }
  offsets_ = register_buffer("offsets", torch::tensor(offs).view({k, 2}));
}

torch::Tensor PointTrackerImpl::features(const torch::Tensor& images) {
  require(images.dim() == 5 && images.size(2) == 1, ErrorCategory::kShape,
          "point tracker: images must be [B, T, 1, S, S]");
  const auto b = images.size(0);
  const auto t = images.size(1);
  auto x = images.reshape({b * t, 1, images.size(3), images.size(4)}) - 0.5;
  x = torch::relu(conv1_(x));
  x = torch::relu(conv2_(x));
  x = conv3_(x);
  return x.view({b, t, x.size(1), x.size(2), x.size(3)});
}

torch::Tensor PointTrackerImpl::sample(const torch::Tensor& features,
                                       const torch::Tensor& coords) const {
  // features [N, F, h, w], coords [N, P, K, 2] in feature cells -> [N, F, P, K]
  const auto h = features.size(2);
  const auto w = features.size(3);
  auto gx = coords.select(-1, 0) * (2.0 / static_cast<double>(w - 1)) - 1.0;
  auto gy = coords.select(-1, 1) * (2.0 / static_cast<double>(h - 1)) - 1.0;
  auto grid = torch::stack({gx, gy}, -1);
  if (grid.dim() == 3) grid = grid.unsqueeze(2);
  return F::grid_sample(features, grid,
                        F::GridSampleFuncOptions().mode(torch::kBilinear).padding_mode(
                            torch::kZeros).align_corners(true));
}

torch::Tensor PointTrackerImpl::initial_appearance(const torch::Tensor& features,
                                                   const torch::Tensor& coords0) {
  // features [B, T, F, h, w]; coords0 [B, P, 2] px -> [B, P, F]
  auto cells = (coords0 - 1.0) / 4.0;
  auto s = sample(features.select(1, 0), cells.unsqueeze(2));  // [B, F, P, 1]
  return s.squeeze(-1).permute({0, 2, 1}).contiguous();
}

torch::Tensor PointTrackerImpl::local_correlation(const torch::Tensor& features,
                                                  const torch::Tensor& coords,
                                                  const torch::Tensor& q) const {
  const auto b = coords.size(0);
  const auto p = coords.size(1);
  const auto t = coords.size(2);
  const auto f = features.size(2);
  const auto k = offsets_.size(0);
  auto feats = features.reshape({b * t, f, features.size(3), features.size(4)});
  auto cells = ((coords - 1.0) / 4.0).permute({0, 2, 1, 3}).reshape({b * t, p, 1, 2});
  auto sampled = sample(feats, cells + offsets_.view({1, 1, k, 2}));  // [BT, F, P, K]
  auto qq = q.permute({0, 2, 1, 3}).reshape({b * t, p, f});
  auto corr = torch::einsum("nfpk,npf->npk", {sampled, qq}) / std::sqrt(static_cast<double>(f));
  return corr.view({b, t, p, k}).permute({0, 2, 1, 3});
}

PointTrackOutput PointTrackerImpl::iterate(const torch::Tensor& coords0, const torch::Tensor& q0,
                                           const torch::Tensor& features, int iterations) {
  require(iterations >= 0, ErrorCategory::kDomain, "point_track_iterate: M must be >= 0");
  require(features.dim() == 5 && features.size(1) == config_.window, ErrorCategory::kShape,
          "point_track_iterate: window must hold " + std::to_string(config_.window) + " frames");
  require(coords0.dim() == 4 && coords0.size(2) == config_.window && coords0.size(3) == 2,
          ErrorCategory::kShape, "point_track_iterate: coords must be [B, P, T, 2]");
  require(q0.dim() == 3 && q0.size(1) == coords0.size(1), ErrorCategory::kShape,
          "point_track_iterate: q0 must be [B, P, F]");
  const auto b = coords0.size(0);
  const auto p = coords0.size(1);
  const auto t = coords0.size(2);
  const auto d = static_cast<int64_t>(config_.token_dim);

  PointTrackOutput out;
  auto coords = coords0;
  auto q = q0.unsqueeze(2).expand({b, p, t, q0.size(2)}).contiguous();
  for (int m = 0; m < iterations; ++m) {
    auto corr = local_correlation(features, coords, q);
    auto rel = (coords - coords.select(2, 0).unsqueeze(2)) / 16.0;
    auto x = embed_(torch::cat({corr, rel, q}, -1)) + time_embed_.view({1, 1, t, d});
    for (std::size_t i = 0; i < time_blocks_->size(); ++i) {
      x = time_blocks_[i]->as<nn::TransformerBlock>()->forward(x.reshape({b * p, t, d}));
      x = x.view({b, p, t, d}).permute({0, 2, 1, 3}).reshape({b * t, p, d});
      x = point_blocks_[i]->as<nn::TransformerBlock>()->forward(x);
      x = x.view({b, t, p, d}).permute({0, 2, 1, 3}).contiguous();
    }
    x = norm_(x);
    coords = coords + coord_head_(x) * 4.0;
    q = q + q_head_(x);
    out.q_history.push_back(q);
  }
  out.coords = coords;
  out.delta_coords = coords - coords0;
  out.delta_q = q;
  return out;
}

torch::Tensor PointTrackerImpl::visibility(const torch::Tensor& q) {
  return torch::sigmoid(vis_head_(q).squeeze(-1));
}

}  // namespace mptrack::occu
