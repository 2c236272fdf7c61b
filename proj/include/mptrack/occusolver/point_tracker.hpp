// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include <torch/torch.h>

#include "mptrack/common/rng.hpp"
#include "mptrack/synthdata/box.hpp"

namespace mptrack::occu {

inline constexpr int kDefaultNumPoints = 16;
inline constexpr int kFullScaleNumPoints = 128;

struct PointTrackerConfig {
  int feature_dim = 32;  // F
  int token_dim = 64;
  int heads = 4;
  int iterations = 4;    // M
  int corr_radius = 3;   // 7x7 local correlation
  int window = 8;

  void validate() const;
};

/// Uniform points inside `box`, as pixel coordinates [n, 2] (x, y), float32.
/// Throws kDomain for a box with no area or n < 1.
torch::Tensor sample_query_points(const Box& box, int n, Rng& rng);

/// Same draw expressed as offsets normalized to the box, in [0, 1]^2.
torch::Tensor sample_query_offsets(int n, Rng& rng);

/// Maps normalized offsets [.., 2] into pixel coordinates inside `box`.
torch::Tensor offsets_to_points(const torch::Tensor& offsets, const Box& box);

struct PointTrackOutput {
  torch::Tensor delta_coords;           // [B, P, T, 2] px
  torch::Tensor delta_q;                // [B, P, T, F] final appearance
  std::vector<torch::Tensor> q_history;  // Q^(1..M), each [B, P, T, F]
  torch::Tensor coords;                 // [B, P, T, 2] = initial + delta
};

/// Small iterative point tracker: per-frame appearance features, local
/// correlation against the per-point appearance token, and a token mixer
/// over time and over points. Trained once, then frozen.
class PointTrackerImpl : public torch::nn::Module {
 public:
  explicit PointTrackerImpl(const PointTrackerConfig& config = {});

  const PointTrackerConfig& config() const { return config_; }

  /// images [B, T, 1, S, S] in [0, 1] -> features [B, T, F, h, w].
  torch::Tensor features(const torch::Tensor& images);

  /// Bilinear read of `features` [N, F, h, w] at pixel coords [N, P, 2].
  torch::Tensor sample(const torch::Tensor& features, const torch::Tensor& coords) const;

  /// Q^0 from the first window frame at the first-frame coordinates.
  torch::Tensor initial_appearance(const torch::Tensor& features, const torch::Tensor& coords0);

  /// M refinement passes. M = 0 returns zero deltas, delta_q = broadcast
  /// q0 and an empty history. Throws kShape when T != window.
  PointTrackOutput iterate(const torch::Tensor& coords0, const torch::Tensor& q0,
                           const torch::Tensor& features, int iterations);

  /// The tracker's own visibility head: q [.., F] -> probability [..].
  torch::Tensor visibility(const torch::Tensor& q);

  torch::nn::Linear& vis_head() { return vis_head_; }

  /// Pixel -> feature-cell coordinate.
  static double to_feature(double px) { return (px - 1.0) / 4.0; }

 private:
  torch::Tensor local_correlation(const torch::Tensor& features, const torch::Tensor& coords,
                                  const torch::Tensor& q) const;

  PointTrackerConfig config_;
  torch::nn::Conv2d conv1_{nullptr};
  torch::nn::Conv2d conv2_{nullptr};
  torch::nn::Conv2d conv3_{nullptr};
  torch::nn::Linear embed_{nullptr};
  torch::Tensor time_embed_;
  torch::nn::ModuleList time_blocks_;
  torch::nn::ModuleList point_blocks_;
  torch::nn::LayerNorm norm_{nullptr};
  torch::nn::Linear coord_head_{nullptr};
  torch::nn::Linear q_head_{nullptr};
  torch::nn::Linear vis_head_{nullptr};
  torch::Tensor offsets_;  // [K, 2] correlation offsets in feature cells
};
TORCH_MODULE(PointTracker);

}  // namespace mptrack::occu
