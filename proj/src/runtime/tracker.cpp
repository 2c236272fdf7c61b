// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "mptrack/runtime/tracker.hpp"

#include <algorithm>
#include <set>

#include "mptrack/common/error.hpp"
#include "mptrack/synthdata/labels.hpp"
#include "mptrack/trackhead/head_ops.hpp"

namespace mptrack::runtime {

void TrackerOptions::validate() const {
  require(frame_step >= 1, ErrorCategory::kConfig, "tracker: frame_step must be >= 1");
  require(visibility_init_threshold >= 0.0 && visibility_init_threshold <= 1.0,
          ErrorCategory::kConfig, "tracker: visibility_init_threshold must be in [0, 1]");
  require(occluded_threshold >= 0.0 && occluded_threshold <= 1.0, ErrorCategory::kConfig,
          "tracker: occluded_threshold must be in [0, 1]");
  require(num_points >= 1, ErrorCategory::kConfig, "tracker: num_points must be >= 1");
  require(resample_patience >= 1, ErrorCategory::kConfig,
          "tracker: resample_patience must be >= 1");
}

VisibilityOracle ground_truth_oracle(const synth::SyntheticSequence& sequence) {
  const auto* seq = &sequence;
  return [seq](const std::vector<int>& ids, const torch::Tensor& coords) {
    const auto p = coords.size(0);
    const auto t = coords.size(1);
    auto c = coords.to(torch::kFloat64).contiguous();
    auto acc = c.accessor<double, 3>();
    auto out = torch::zeros({p, t});
    auto o = out.accessor<float, 2>();
    for (int64_t k = 0; k < t; ++k) {
      for (int64_t i = 0; i < p; ++i) {
        o[i][k] = seq->point_visible(ids[k], acc[i][k][0], acc[i][k][1]) ? 1.0f : 0.0f;
      }
    }
    return out;
  };
}

Tracker::Tracker(head::TrackerNet net, occu::OccuSolver occusolver,
                 const TrackerOptions& options)
    : net_(std::move(net)), occu_(std::move(occusolver)), options_(options) {
  require(!net_.is_empty(), ErrorCategory::kInit, "tracker: missing tracking network");
  options_.validate();
  if (!occu_.is_empty()) {
    const auto& a = net_->profile();
    const auto& b = occu_->profile();
    require(a.image_size == b.image_size && a.grid == b.grid && a.channels == b.channels,
            ErrorCategory::kInit, "tracker: OccuSolver profile does not match the network");
    require(occu_->config().num_points == options_.num_points, ErrorCategory::kInit,
            "tracker: num_points does not match the OccuSolver checkpoint");
  }
  net_->eval();
  if (!occu_.is_empty()) occu_->eval();
}

torch::Tensor Tracker::encode(const synth::Image& image) {
  return net_->encode_frame(head::image_tensor(image).unsqueeze(0));
}

head::ReferenceSet Tracker::reference_set() const {
  const Box a[1] = {state_.slot_boxes[0]};
  const Box b[1] = {state_.slot_boxes[1]};
  return head::make_reference_set(state_.slot_features[0], state_.slot_features[1], a, b,
                                  net_->profile().grid_spec());
}

Tracker::WindowEstimate Tracker::estimate_window(const std::vector<int>& ids,
                                                 const Box& current_prior,
                                                 const torch::Tensor& z_cur) {
  const auto grid = net_->profile().grid_spec();
  std::vector<torch::Tensor> imgs, coords;
  for (int id : ids) {
    imgs.push_back(state_.images.at(id));
    auto it = state_.boxes.find(id);
    const Box& box = it != state_.boxes.end() ? it->second : current_prior;
    coords.push_back(occu::offsets_to_points(state_.query_offsets, box));
  }
  const Box& first_box =
      state_.boxes.count(ids.front()) ? state_.boxes.at(ids.front()) : current_prior;
  occu::OccuInput in;
  in.images = torch::stack(imgs).unsqueeze(0);
  in.coords0 = torch::stack(coords, 1).unsqueeze(0);
  in.prior_first = synth::encode_cls_label(first_box, grid).values.unsqueeze(0);
  in.prior_middle = synth::encode_cls_label(state_.slot_boxes[1], grid).values.unsqueeze(0);
  in.z_cur = z_cur;
  auto out = occu_->forward(in);

  WindowEstimate est;
  est.coords = out.coords;
  est.vis_prob = out.vis_prob;
  est.fused = out.fused;
  if (oracle_) {
    est.vis_prob = oracle_(ids, out.coords[0]).unsqueeze(0);
    const auto last = static_cast<int64_t>(ids.size()) - 1;
    est.fused = occu_->fuse(out.coords.select(2, last),
                            occu::binarize_visibility(est.vis_prob.select(2, last)), z_cur);
  }
  return est;
}

double Tracker::fraction_visible(const torch::Tensor& vis_prob_last) const {
  return occu::binarize_visibility(vis_prob_last).to(torch::kFloat64).mean().item<double>();
}

void Tracker::init(const synth::Image& first_frame, const Box& init_box, int frame_id) {
  require(init_box.valid() && init_box.width() > 0.0 && init_box.height() > 0.0 &&
              init_box.inside(first_frame.width, first_frame.height),
          ErrorCategory::kDomain, "tracker init: box must be a valid box inside the frame");
  torch::NoGradGuard no_grad;
  state_ = TrackerState{};
  rng_.seed(derive_seed(options_.seed, "tracker"));
  state_.init_frame = frame_id;
  state_.frame = frame_id;
  state_.images[frame_id] = head::image_tensor(first_frame);
  state_.boxes[frame_id] = init_box;
  auto feat = encode(first_frame);
  for (int s = 0; s < 2; ++s) {
    state_.slot_features[s] = feat;
    state_.slot_boxes[s] = init_box;
    state_.slot_frames[s] = frame_id;
  }
  state_.query_offsets = occu::sample_query_offsets(options_.num_points, rng_);
  state_.initialized = true;

  if (options_.use_occusolver && !occu_.is_empty()) {
    auto z = net_->predict(reference_set(), feat).z;
    const std::vector<int> ids(occu_->config().tracker.window, frame_id);
    auto est = estimate_window(ids, init_box, z);
    const auto last = static_cast<int64_t>(ids.size()) - 1;
    state_.visible_fraction = fraction_visible(est.vis_prob[0].select(1, last));
    if (state_.visible_fraction >= options_.visibility_init_threshold) {
      state_.occusolver_active = true;
      state_.fifo = FifoWindow(occu_->config().tracker.window);
      state_.fifo.push(frame_id, false);
      state_.last_coords = est.coords[0].select(1, last);
      state_.last_visible = occu::binarize_visibility(est.vis_prob[0].select(1, last));
      state_.last_window_box = init_box;
    }
  }
}

FrameRecord Tracker::step(const synth::Image& frame, int frame_id) {
  require(state_.initialized, ErrorCategory::kState, "tracker step: state is not initialized");
  torch::NoGradGuard no_grad;
  const auto& profile = net_->profile();
  const Box prev_box = state_.boxes.at(state_.frame);
  state_.images[frame_id] = head::image_tensor(frame);

  auto feat = encode(frame);
  auto pred = net_->predict(reference_set(), feat);
  auto z_use = pred.z;
  const bool window_frame = (frame_id - state_.init_frame) % options_.frame_step == 0;
  const int window = occu_.is_empty() ? 0 : occu_->config().tracker.window;

  if (state_.occusolver_active) {
    if (window_frame) {
      const auto ids = state_.fifo.candidate(frame_id);
      auto est = estimate_window(ids, prev_box, pred.z);
      const auto last = static_cast<int64_t>(window) - 1;
      state_.visible_fraction = fraction_visible(est.vis_prob[0].select(1, last));
      const bool occluded = state_.visible_fraction < options_.occluded_threshold;
      state_.fifo.push(frame_id, occluded);
      state_.last_coords = est.coords[0].select(1, last);
      state_.last_visible = occu::binarize_visibility(est.vis_prob[0].select(1, last));
      state_.last_window_box = prev_box;
      z_use = est.fused->z_tilde;
      if (state_.visible_fraction < options_.resample_fraction) {
        if (++state_.low_visibility_windows >= options_.resample_patience) {
          state_.query_offsets = occu::sample_query_offsets(options_.num_points, rng_);
          state_.low_visibility_windows = 0;
        }
      } else {
        state_.low_visibility_windows = 0;
      }
    } else {
      const float dx = static_cast<float>(prev_box.center_x() - state_.last_window_box.center_x());
      const float dy = static_cast<float>(prev_box.center_y() - state_.last_window_box.center_y());
      auto coords = state_.last_coords + torch::tensor({dx, dy});
      z_use = occu_->fuse(coords.unsqueeze(0), state_.last_visible.unsqueeze(0), pred.z).z_tilde;
    }
  } else if (options_.use_occusolver && !occu_.is_empty() && window_frame) {
    // Re-check the first-frame visibility constraint on the current frame.
    const std::vector<int> ids(window, frame_id);
    state_.boxes[frame_id] = prev_box;
    auto est = estimate_window(ids, prev_box, pred.z);
    state_.boxes.erase(frame_id);
    const auto last = static_cast<int64_t>(window) - 1;
    state_.visible_fraction = fraction_visible(est.vis_prob[0].select(1, last));
    if (state_.visible_fraction >= options_.visibility_init_threshold) {
      state_.occusolver_active = true;
      state_.fifo = FifoWindow(window);
      state_.fifo.push(frame_id, false);
      state_.last_coords = est.coords[0].select(1, last);
      state_.last_visible = occu::binarize_visibility(est.vis_prob[0].select(1, last));
      state_.last_window_box = prev_box;
      z_use = est.fused->z_tilde;
    }
  }

  auto maps = net_->head(pred.omega, z_use);
  auto decoded = head::decode_box(maps.scores[0], maps.ltrb[0], profile.stride());
  Box box = clipped(decoded.box, frame.width, frame.height);
  if (!(box.width() >= 1.0 && box.height() >= 1.0)) box = prev_box;
  state_.boxes[frame_id] = box;
  state_.frame = frame_id;

  if (decoded.peak_score >= options_.confidence_threshold) {
    state_.slot_features[1] = feat;
    state_.slot_boxes[1] = box;
    state_.slot_frames[1] = frame_id;
  }

  // Keep only what the window can still reference.
  std::set<int> keep;
  for (int id : state_.fifo.ids()) keep.insert(id);
  if (auto lu = state_.fifo.last_unoccluded()) keep.insert(*lu);
  keep.insert(frame_id);
  std::erase_if(state_.images, [&](const auto& kv) { return !keep.count(kv.first); });
  std::erase_if(state_.boxes, [&](const auto& kv) { return !keep.count(kv.first); });

  FrameRecord rec;
  rec.frame = frame_id;
  rec.box = box;
  rec.peak_score = decoded.peak_score;
  rec.visible_fraction = state_.visible_fraction;
  rec.occusolver_active = state_.occusolver_active;
  return rec;
}

TrackResult Tracker::run(const synth::SyntheticSequence& sequence) {
  require(!sequence.frames.empty(), ErrorCategory::kDomain, "tracker run: empty sequence");
  require(sequence.frames.front().width == net_->profile().image_size &&
              sequence.frames.front().height == net_->profile().image_size,
          ErrorCategory::kInit, "tracker run: sequence image size does not match the profile");
  TrackResult result;
  init(sequence.frames[0], sequence.gt_boxes[0], 0);
  FrameRecord first;
  first.frame = 0;
  first.box = sequence.gt_boxes[0];
  first.peak_score = 1.0;
  first.visible_fraction = state_.visible_fraction;
  first.occusolver_active = state_.occusolver_active;
  result.frames.push_back(first);
  for (int t = 1; t < sequence.num_frames(); ++t) {
    result.frames.push_back(step(sequence.frames[t], t));
  }
  return result;
}

}  // namespace mptrack::runtime
