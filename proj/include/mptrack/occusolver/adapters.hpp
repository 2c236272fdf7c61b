// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include <torch/torch.h>

#include "mptrack/nn/transformer.hpp"
#include "mptrack/synthdata/labels.hpp"
#include "mptrack/trackhead/modules.hpp"

namespace mptrack::occu {

/// Embeds an object prior score map into point-tracker feature space.
class PriorEncoderImpl : public torch::nn::Module {
 public:
  PriorEncoderImpl(const synth::GridSpec& grid, int64_t feature_dim);

  /// prior [B, H, W] -> embedding [B, F, h, w] resized to the feature grid.
  torch::Tensor forward(const torch::Tensor& prior, int64_t h, int64_t w);

  head::LabelEncoder& encoder() { return encoder_; }

 private:
  synth::GridSpec grid_;
  head::LabelEncoder encoder_{nullptr};
};
TORCH_MODULE(PriorEncoder);

/// frame_features [B, F, h, w] + embedding of `prior` [B, H, W].
torch::Tensor inject_prior(PriorEncoder& encoder, const torch::Tensor& frame_features,
                           const torch::Tensor& prior);

/// Applies inject_prior to window frames 1 and ceil(T/2) (zero-based 0 and
/// ceil(T/2) - 1); other frames pass through untouched.
torch::Tensor inject_window_priors(PriorEncoder& encoder, const torch::Tensor& window_features,
                                   const torch::Tensor& prior_first,
                                   const torch::Tensor& prior_middle);

inline int middle_frame_index(int window) { return (window + 1) / 2 - 1; }

/// Reduces each Q^(m) and mixes it over time; weights shared across m.
class LightTransImpl : public torch::nn::Module {
 public:
  LightTransImpl(int64_t feature_dim, int64_t reduced_dim, int64_t window, int64_t heads = 4,
                 int64_t layers = 2);

  /// q [B, P, T, F] -> [B, P, T, R]
  torch::Tensor forward(const torch::Tensor& q);

 private:
  int64_t reduced_;
  torch::nn::Linear reduce_{nullptr};
  torch::Tensor time_embed_;
  nn::TransformerEncoder encoder_{nullptr};
};
TORCH_MODULE(LightTrans);

/// Maps the summed reduced tokens back to F; output layer starts at zero.
class ScaleNetImpl : public torch::nn::Module {
 public:
  ScaleNetImpl(int64_t reduced_dim, int64_t feature_dim);

  torch::Tensor forward(const torch::Tensor& x);

 private:
  torch::nn::Linear fc1_{nullptr};
  torch::nn::Linear fc2_{nullptr};
};
TORCH_MODULE(ScaleNet);

/// Q_cond = ScaleNet(sum_m LightTrans(Q^(m))) + delta_q. Throws kDomain on
/// an empty history.
torch::Tensor ladder_refine(LightTrans& light, ScaleNet& scale,
                            const std::vector<torch::Tensor>& q_history,
                            const torch::Tensor& delta_q);

/// Sigmoid visibility head: a linear path copied from the frozen tracker's
/// head plus a residual MLP whose output layer starts at zero.
class VisHeadImpl : public torch::nn::Module {
 public:
  explicit VisHeadImpl(int64_t feature_dim);

  void init_from(const torch::nn::Linear& frozen_head);

  /// q [.., F] -> probability [..]
  torch::Tensor forward(const torch::Tensor& q);

 private:
  torch::nn::Linear linear_{nullptr};
  torch::nn::Linear fc1_{nullptr};
  torch::nn::Linear fc2_{nullptr};
};
TORCH_MODULE(VisHead);

/// Projects the energy stack to C channels, mixes it jointly with z_cur
/// tokens and returns the energy half of the sequence as E_tilde.
class FusionImpl : public torch::nn::Module {
 public:
  FusionImpl(int64_t num_points, int64_t channels, int64_t grid_h, int64_t grid_w,
             int64_t heads = 4, int64_t layers = 2);

  torch::Tensor forward(const torch::Tensor& energy, const torch::Tensor& z_cur);

 private:
  int64_t channels_;
  int64_t grid_h_;
  int64_t grid_w_;
  torch::nn::Conv2d project_{nullptr};
  torch::Tensor pos_embed_;
  torch::Tensor energy_embed_;
  torch::Tensor z_embed_;
  nn::TransformerEncoder encoder_{nullptr};
};
TORCH_MODULE(Fusion);

/// z_tilde = z_cur + conv1x1([E_tilde, z_cur]); the conv starts at zero.
class EnsembleImpl : public torch::nn::Module {
 public:
  explicit EnsembleImpl(int64_t channels);

  torch::Tensor forward(const torch::Tensor& e_tilde, const torch::Tensor& z_cur);

 private:
  torch::nn::Conv2d mix_{nullptr};
};
TORCH_MODULE(Ensemble);

}  // namespace mptrack::occu
