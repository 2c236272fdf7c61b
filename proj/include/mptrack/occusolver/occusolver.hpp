// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include <torch/torch.h>

#include "mptrack/occusolver/adapters.hpp"
#include "mptrack/occusolver/energy.hpp"
#include "mptrack/occusolver/point_tracker.hpp"
#include "mptrack/trackhead/profile.hpp"

namespace mptrack::occu {

struct OccuSolverConfig {
  PointTrackerConfig tracker;
  int num_points = kDefaultNumPoints;
  int reduced_dim = 16;
  double energy_sigma = kDefaultEnergySigma;

  void validate() const;
};

struct OccuLambdas {
  double cls_got = 200.0;
  double cls_pt = 100.0;
  double reg_got = 1.0;
  double reg_pt = 0.5;
};

struct OccuLossComponents {
  double cls_pt = 0.0;
  double reg_pt = 0.0;
  double cls_got = 0.0;
  double reg_got = 0.0;
  double total = 0.0;
};

/// Weighted sum of the four components, in double.
double combine_occu_losses(const OccuLossComponents& c, const OccuLambdas& lambdas);

struct OccuLoss {
  torch::Tensor total;
  OccuLossComponents components;  // components.total == combine_occu_losses(...)
};

/// Dual supervision: classification and regression on both E_tilde and
/// z_tilde with the hinge and GIoU losses.
OccuLoss occusolver_loss(head::RegDec& regdec, const torch::Tensor& omega,
                         const torch::Tensor& e_tilde, const torch::Tensor& z_tilde,
                         const torch::Tensor& cls_target, const torch::Tensor& reg_target,
                         const torch::Tensor& reg_valid, const OccuLambdas& lambdas = {});

struct OccuInput {
  torch::Tensor images;        // [B, T, 1, S, S]
  torch::Tensor coords0;       // [B, P, T, 2] px
  torch::Tensor prior_first;   // [B, H, W]
  torch::Tensor prior_middle;  // [B, H, W]
  torch::Tensor z_cur;         // [B, C, H, W]
};

struct FusedFeatures {
  torch::Tensor energy;   // [B, P, H, W]
  torch::Tensor e_tilde;  // [B, C, H, W]
  torch::Tensor z_tilde;  // [B, C, H, W]
};

struct OccuOutput {
  torch::Tensor coords;    // [B, P, T, 2]
  torch::Tensor vis_prob;  // [B, P, T]
  torch::Tensor q_cond;    // [B, P, T, F]
  FusedFeatures fused;
  int clamped_points = 0;
};

class OccuAdaptersImpl : public torch::nn::Module {
 public:
  OccuAdaptersImpl(const head::ModelProfile& profile, const OccuSolverConfig& config);

  PriorEncoder prior_encoder{nullptr};
  LightTrans light_trans{nullptr};
  ScaleNet scale_net{nullptr};
  VisHead vis_head{nullptr};
  Fusion fusion{nullptr};
  Ensemble ensemble{nullptr};
};
TORCH_MODULE(OccuAdapters);

class OccuSolverImpl : public torch::nn::Module {
 public:
  OccuSolverImpl(const head::ModelProfile& profile, const OccuSolverConfig& config = {});

  const OccuSolverConfig& config() const { return config_; }
  const head::ModelProfile& profile() const { return profile_; }

  PointTracker& tracker() { return tracker_; }
  OccuAdapters& adapters() { return adapters_; }

  /// Freezes the point tracker and copies its visibility head into VisHead.
  void freeze_tracker();

  /// Full path: prior injection, M tracker passes, ladder, VisHead, energy on
  /// the last window frame, fusion and ensemble.
  OccuOutput forward(const OccuInput& input);

  /// The frozen tracker alone (no priors): coords and its own visibility.
  std::pair<torch::Tensor, torch::Tensor> track_frozen(const torch::Tensor& images,
                                                       const torch::Tensor& coords0);

  /// Energy -> E_tilde -> z_tilde from explicit current-frame points.
  FusedFeatures fuse(const torch::Tensor& coords, const torch::Tensor& visible,
                     const torch::Tensor& z_cur, int* clamped = nullptr);

  std::string frozen_hash() const;

 private:
  head::ModelProfile profile_;
  OccuSolverConfig config_;
  PointTracker tracker_{nullptr};
  OccuAdapters adapters_{nullptr};
};
TORCH_MODULE(OccuSolver);

}  // namespace mptrack::occu
