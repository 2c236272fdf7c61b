// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "mptrack/app/config.hpp"
#include "mptrack/jepa/pretrain.hpp"
#include "mptrack/jepa/student.hpp"
#include "mptrack/metrics/evaluation.hpp"
#include "mptrack/occusolver/occusolver.hpp"
#include "mptrack/runtime/tracker.hpp"
#include "mptrack/synthdata/dataset.hpp"
#include "mptrack/trackhead/tracker_net.hpp"

namespace mptrack::app {

/// Single-threaded, deterministic torch execution.
void configure_torch();

enum class Split { kTrain, kHeldout, kEval, kOcclusion };

std::string to_string(Split split);
Split split_from_string(const std::string& name);

/// Deterministic in (data_seed, split). The occlusion split forces one
/// full occlusion of `full_occlusion_frames` frames per sequence.
std::vector<synth::SyntheticSequence> make_split(const RunConfig& config, Split split);

head::TrackerNet clone_net(head::TrackerNet& net);

struct HeadLossValue {
  torch::Tensor total;
  double cls = 0.0;
  double reg = 0.0;
};

/// cls_weight * hinge + reg_weight * GIoU on the current-frame labels.
HeadLossValue head_loss(head::TrackerNet& net, const head::PredictorOutput& pred,
                        const head::LabelBatch& labels, double cls_weight, double reg_weight);

struct EpochLog {
  int epoch = 0;
  double loss = 0.0;
};

/// Stage 0: end-to-end training of the tracking network from scratch.
head::TrackerNet train_teacher(const RunConfig& config,
                               const std::vector<synth::SyntheticSequence>& train,
                               std::vector<EpochLog>* log = nullptr);

/// Point tracks for a window: `points` sampled on the first frame's target
/// (visible there when possible) and followed through all window frames.
struct PointWindow {
  torch::Tensor images;   // [T, 1, S, S]
  torch::Tensor gt;       // [P, T, 2]
  torch::Tensor gt_vis;   // [P, T] float 0/1
  torch::Tensor coords0;  // [P, T, 2] = gt + uniform noise
};

PointWindow make_point_window(const synth::SyntheticSequence& seq, const synth::WindowSpec& w,
                              int points, double noise, Rng& rng);

struct PointBatch {
  torch::Tensor images, gt, gt_vis, coords0;
};
PointBatch stack_point_windows(const std::vector<PointWindow>& windows);

/// Stage 0: point tracker on synthetic ground-truth tracks.
occu::PointTracker train_point_tracker(const RunConfig& config,
                                       const std::vector<synth::SyntheticSequence>& train,
                                       std::vector<EpochLog>* log = nullptr);

/// Held-out and training windows for JEPA pretraining and head fine-tuning.
std::vector<synth::WindowSpec> sample_windows(const std::vector<synth::SyntheticSequence>& seqs,
                                              int max_step, int count, std::uint64_t seed);

struct PretrainOutcome {
  jepa::PretrainResult result;
  head::TrackerNet student{nullptr};  // with ProjNet
  jepa::Expander expander{nullptr};
};

/// Stage 1 against a frozen copy of `teacher`.
PretrainOutcome pretrain_jepa(const RunConfig& config, head::TrackerNet& teacher,
                              const std::vector<synth::SyntheticSequence>& train,
                              const std::vector<synth::SyntheticSequence>& heldout);

/// Supervised fine-tuning of label encoder, predictor, ProjNet and RegDec on
/// a copy of `init`; the frame encoder stays fixed.
head::TrackerNet train_head(const RunConfig& config, head::TrackerNet& init,
                            const std::vector<synth::SyntheticSequence>& train,
                            std::vector<EpochLog>* log = nullptr);

struct OccuTrainLog {
  int step = 0;
  occu::OccuLossComponents components;
  double vis_bce = 0.0;
};

/// Stage 2: ladder-side adaptation with the head and predictor frozen.
occu::OccuSolver train_occusolver(const RunConfig& config, head::TrackerNet& net,
                                  occu::PointTracker& tracker,
                                  const std::vector<synth::SyntheticSequence>& train,
                                  std::vector<OccuTrainLog>* log = nullptr);

struct VisibilityAccuracy {
  double vishead = 0.0;
  double frozen = 0.0;
  std::int64_t samples = 0;
};

VisibilityAccuracy evaluate_visibility(const RunConfig& config, occu::OccuSolver& occusolver,
                                       const std::vector<synth::SyntheticSequence>& seqs,
                                       int windows, std::uint64_t seed);

struct SequenceEval {
  runtime::TrackResult track;
  metrics::MetricReport report;
  bool occlusion_heavy = false;
};

struct BenchmarkEval {
  std::vector<SequenceEval> sequences;
  metrics::MetricReport overall;
  metrics::MetricReport occlusion_heavy;
  int heavy_count = 0;
};

BenchmarkEval evaluate_tracker(const RunConfig& config, head::TrackerNet& net,
                               occu::OccuSolver occusolver,
                               const std::vector<synth::SyntheticSequence>& seqs);

std::vector<metrics::FramePrediction> to_predictions(const runtime::TrackResult& track);

/// First frame after the longest run of fully hidden frames, or -1.
int reappearance_frame(const synth::SyntheticSequence& seq, int min_hidden);

/// IoU > 0.5 on some frame in [r, r + within].
bool recovered(const runtime::TrackResult& track, const synth::SyntheticSequence& seq, int r,
               int within = 5);

}  // namespace mptrack::app
