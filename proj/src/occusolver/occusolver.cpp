// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "mptrack/occusolver/occusolver.hpp"

#include "mptrack/common/error.hpp"
#include "mptrack/common/hash.hpp"
#include "mptrack/metrics/losses.hpp"
#include "mptrack/nn/transformer.hpp"
#include "mptrack/trackhead/head_ops.hpp"

namespace mptrack::occu {

void OccuSolverConfig::validate() const {
  tracker.validate();
  require(tracker.iterations >= 1, ErrorCategory::kConfig,
          "occusolver: tracker iterations must be >= 1");
  require(num_points >= 1, ErrorCategory::kConfig, "occusolver: num_points must be >= 1");
  require(reduced_dim >= 4 && reduced_dim % 4 == 0, ErrorCategory::kConfig,
          "occusolver: reduced_dim must be a positive multiple of 4");
  require(energy_sigma > 0.0, ErrorCategory::kConfig, "occusolver: energy_sigma must be > 0");
}

double combine_occu_losses(const OccuLossComponents& c, const OccuLambdas& l) {
  return l.cls_pt * c.cls_pt + l.reg_pt * c.reg_pt + l.cls_got * c.cls_got +
         l.reg_got * c.reg_got;
}

OccuLoss occusolver_loss(head::RegDec& regdec, const torch::Tensor& omega,
                         const torch::Tensor& e_tilde, const torch::Tensor& z_tilde,
                         const torch::Tensor& cls_target, const torch::Tensor& reg_target,
                         const torch::Tensor& reg_valid, const OccuLambdas& lambdas) {
  require(e_tilde.sizes() == z_tilde.sizes(), ErrorCategory::kShape,
          "occusolver_loss: E_tilde and z_tilde grids must match");
  require(cls_target.dim() == 3 && cls_target.size(1) == e_tilde.size(2) &&
              cls_target.size(2) == e_tilde.size(3),
          ErrorCategory::kShape, "occusolver_loss: target grid must match features");
  auto cls_pt = metrics::hinge_cls_loss(head::classify(omega, e_tilde), cls_target);
  auto reg_pt = metrics::ltrb_giou_loss(head::regress(regdec, omega, e_tilde), reg_target,
                                        reg_valid);
  auto cls_got = metrics::hinge_cls_loss(head::classify(omega, z_tilde), cls_target);
  auto reg_got = metrics::ltrb_giou_loss(head::regress(regdec, omega, z_tilde), reg_target,
                                         reg_valid);
  OccuLoss out;
  out.total = lambdas.cls_pt * cls_pt + lambdas.reg_pt * reg_pt + lambdas.cls_got * cls_got +
              lambdas.reg_got * reg_got;
  out.components.cls_pt = cls_pt.item<double>();
  out.components.reg_pt = reg_pt.item<double>();
  out.components.cls_got = cls_got.item<double>();
  out.components.reg_got = reg_got.item<double>();
  out.components.total = combine_occu_losses(out.components, lambdas);
  return out;
}

OccuAdaptersImpl::OccuAdaptersImpl(const head::ModelProfile& profile,
                                   const OccuSolverConfig& config) {
  const int64_t f = config.tracker.feature_dim;
  prior_encoder = register_module("prior_encoder", PriorEncoder(profile.grid_spec(), f));
  light_trans = register_module("light_trans",
                                LightTrans(f, config.reduced_dim, config.tracker.window));
  scale_net = register_module("scale_net", ScaleNet(config.reduced_dim, f));
  vis_head = register_module("vis_head", VisHead(f));
  fusion = register_module("fusion", Fusion(config.num_points, profile.channels, profile.grid,
                                            profile.grid));
  ensemble = register_module("ensemble", Ensemble(profile.channels));
}

OccuSolverImpl::OccuSolverImpl(const head::ModelProfile& profile, const OccuSolverConfig& config)
    : profile_(profile), config_(config) {
  profile_.validate();
  config_.validate();
  tracker_ = register_module("frozen", PointTracker(config_.tracker));
  adapters_ = register_module("adapters", OccuAdapters(profile_, config_));
  adapters_->vis_head->init_from(tracker_->vis_head());
}

void OccuSolverImpl::freeze_tracker() {
  nn::set_trainable(*tracker_, false);
  tracker_->eval();
  adapters_->vis_head->init_from(tracker_->vis_head());
}

OccuOutput OccuSolverImpl::forward(const OccuInput& in) {
  require(in.coords0.dim() == 4 && in.coords0.size(1) == config_.num_points,
          ErrorCategory::kShape,
          "occusolver: expected " + std::to_string(config_.num_points) + " query points");
  auto& a = *adapters_;
  auto feats = tracker_->features(in.images);
  auto q0 = tracker_->initial_appearance(feats, in.coords0.select(2, 0));
  feats = inject_window_priors(a.prior_encoder, feats, in.prior_first, in.prior_middle);
  auto track = tracker_->iterate(in.coords0, q0, feats, config_.tracker.iterations);

  OccuOutput out;
  out.q_cond = ladder_refine(a.light_trans, a.scale_net, track.q_history, track.delta_q);
  out.vis_prob = a.vis_head(out.q_cond);
  out.coords = track.coords;
  const auto last = in.coords0.size(2) - 1;
  out.fused = fuse(track.coords.select(2, last), binarize_visibility(out.vis_prob.select(2, last)),
                   in.z_cur, &out.clamped_points);
  return out;
}

std::pair<torch::Tensor, torch::Tensor> OccuSolverImpl::track_frozen(const torch::Tensor& images,
                                                                      const torch::Tensor& coords0) {
  auto feats = tracker_->features(images);
  auto q0 = tracker_->initial_appearance(feats, coords0.select(2, 0));
  auto track = tracker_->iterate(coords0, q0, feats, config_.tracker.iterations);
  return {track.coords, tracker_->visibility(track.delta_q)};
}

FusedFeatures OccuSolverImpl::fuse(const torch::Tensor& coords, const torch::Tensor& visible,
                                   const torch::Tensor& z_cur, int* clamped) {
  FusedFeatures f;
  f.energy = map_points_to_energy(coords, visible, profile_.grid_spec(), config_.energy_sigma,
                                  clamped)
                 .to(z_cur.dtype());
  f.e_tilde = adapters_->fusion(f.energy, z_cur);
  f.z_tilde = adapters_->ensemble(f.e_tilde, z_cur);
  return f;
}

std::string OccuSolverImpl::frozen_hash() const { return parameter_hash(*tracker_); }

}  // namespace mptrack::occu
