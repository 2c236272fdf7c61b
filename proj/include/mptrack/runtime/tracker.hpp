// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include <torch/torch.h>

#include "mptrack/common/rng.hpp"
#include "mptrack/occusolver/occusolver.hpp"
#include "mptrack/runtime/fifo_window.hpp"
#include "mptrack/synthdata/sequence.hpp"
#include "mptrack/trackhead/tracker_net.hpp"

namespace mptrack::runtime {

struct TrackerOptions {
  int frame_step = kDefaultFrameStep;         // N
  double visibility_init_threshold = 0.85;
  double confidence_threshold = 0.5;
  double occluded_threshold = 0.5;            // visible fraction below -> occluded
  int num_points = occu::kDefaultNumPoints;
  int resample_patience = 3;                  // windows
  double resample_fraction = 0.5;
  bool use_occusolver = true;
  std::uint64_t seed = 0;

  void validate() const;
};

struct FrameRecord {
  int frame = 0;
  Box box;
  double peak_score = 0.0;
  double visible_fraction = 0.0;
  bool occusolver_active = false;
};

struct TrackResult {
  std::vector<FrameRecord> frames;
};

/// Replaces VisHead output with externally supplied visibility: given the
/// window frame ids and coordinates [P, T, 2], returns probabilities [P, T].
using VisibilityOracle =
    std::function<torch::Tensor(const std::vector<int>& frame_ids, const torch::Tensor& coords)>;

/// Ground-truth visibility read from a synthetic sequence.
VisibilityOracle ground_truth_oracle(const synth::SyntheticSequence& sequence);

struct TrackerState {
  bool initialized = false;
  int init_frame = 0;
  int frame = -1;  // last processed frame id
  torch::Tensor slot_features[2];  // [1, C, H, W]; slot 0 is the initial frame
  Box slot_boxes[2];
  int slot_frames[2] = {0, 0};
  FifoWindow fifo;
  torch::Tensor query_offsets;  // [P, 2] normalized to the box
  bool occusolver_active = false;
  double visible_fraction = 0.0;
  torch::Tensor last_coords;   // [P, 2] px on the last window frame
  torch::Tensor last_visible;  // [P] bool
  Box last_window_box;
  int low_visibility_windows = 0;
  std::map<int, torch::Tensor> images;  // frame id -> [1, S, S]
  std::map<int, Box> boxes;             // frame id -> predicted box
};

class Tracker {
 public:
  /// `occusolver` may be empty; then the tracker runs the plain head.
  /// Throws kInit when the profiles of the two networks disagree.
  Tracker(head::TrackerNet net, occu::OccuSolver occusolver, const TrackerOptions& options = {});

  void set_visibility_oracle(VisibilityOracle oracle) { oracle_ = std::move(oracle); }

  /// Throws kDomain when the box is not a valid box inside the frame.
  void init(const synth::Image& first_frame, const Box& init_box, int frame_id = 0);

  /// Throws kState before init.
  FrameRecord step(const synth::Image& frame, int frame_id);

  TrackResult run(const synth::SyntheticSequence& sequence);

  const TrackerState& state() const { return state_; }
  const TrackerOptions& options() const { return options_; }

 private:
  torch::Tensor encode(const synth::Image& image);
  head::ReferenceSet reference_set() const;
  /// Visibility over a window: {coords [1, P, T, 2], probabilities [1, P, T]},
  /// with fused features when z_cur is defined.
  struct WindowEstimate {
    torch::Tensor coords;
    torch::Tensor vis_prob;
    std::optional<occu::FusedFeatures> fused;
  };
  WindowEstimate estimate_window(const std::vector<int>& ids, const Box& current_prior,
                                 const torch::Tensor& z_cur);
  double fraction_visible(const torch::Tensor& vis_prob_last) const;
  void activate(int frame_id);

  head::TrackerNet net_;
  occu::OccuSolver occu_;
  TrackerOptions options_;
  VisibilityOracle oracle_;
  TrackerState state_;
  Rng rng_;
};

}  // namespace mptrack::runtime
