// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "json.hpp"
#include "mptrack/jepa/corruption.hpp"
#include "mptrack/jepa/pretrain.hpp"
#include "mptrack/metrics/evaluation.hpp"
#include "mptrack/occusolver/occusolver.hpp"
#include "mptrack/runtime/tracker.hpp"
#include "mptrack/synthdata/dataset.hpp"
#include "mptrack/trackhead/profile.hpp"

namespace mptrack::app {

/// Flat run configuration. Every key is readable from a JSON file and
/// overridable from the command line as `--set key=value`.
struct RunConfig {
  // profile
  int image_size = 126;
  int grid = 9;
  int channels = 64;

  std::uint64_t seed = 0;       // model initialization and sampling
  std::uint64_t data_seed = 7;  // synthetic splits

  // data
  int train_sequences = 48;
  int heldout_sequences = 12;
  int eval_sequences = 50;
  int occlusion_sequences = 10;
  int num_frames = 64;
  int max_window_step = 8;
  int full_occlusion_frames = 20;
  double occlusion_probability = 0.6;
  int max_distractors = 2;
  double noise_std = 0.02;

  // stage 0: teacher and point tracker
  int teacher_epochs = 4;
  int teacher_windows = 6000;
  double teacher_lr = 1e-3;
  int teacher_batch = 16;
  double head_cls_weight = 100.0;
  double head_reg_weight = 1.0;
  int tracker_steps = 1500;
  double tracker_lr = 1e-3;
  int tracker_batch = 4;
  double tracker_init_noise = 5.0;  // px

  // stage 1: JEPA pretraining
  double alpha = jepa::kDefaultAlpha;
  double beta = jepa::kDefaultBeta;
  double rho_max = jepa::kDefaultRhoMax;
  std::string corruption = "copy-paste";
  double jepa_lr = 1e-4;
  double projnet_lr = 1e-3;
  int jepa_epochs = 1;
  int jepa_batch = 32;
  int jepa_windows = 4000;
  double jepa_warmup = 0.1;

  // head fine-tuning
  int head_epochs = 1;
  double head_lr = 1e-4;
  int head_batch = 16;
  int head_windows = 4000;

  // stage 2: OccuSolver
  double lambda_cgot = 200.0;
  double lambda_cpt = 100.0;
  double lambda_rgot = 1.0;
  double lambda_rpt = 0.5;
  double vis_weight = 1.0;
  int occu_steps = 600;
  double occu_lr = 1e-3;
  int occu_batch = 4;
  int num_points = occu::kDefaultNumPoints;
  int tracker_iterations = 4;

  // evaluation and runtime
  double pr_threshold = 20.0;
  double npr_threshold = 0.2;
  int frame_step = 8;
  double visibility_init = 0.85;
  double confidence_threshold = 0.5;

  // paths
  std::string data_dir = "data";
  std::string checkpoint_dir = "checkpoints";
  std::string report_dir = "reports";

  head::ModelProfile profile() const { return {image_size, grid, channels}; }
  synth::ScenarioOptions scenario() const;
  jepa::PretrainConfig pretrain_config() const;
  occu::OccuSolverConfig occu_config() const;
  occu::OccuLambdas lambdas() const;
  runtime::TrackerOptions tracker_options() const;
  metrics::EvalOptions eval_options() const;

  /// Throws kConfig naming the first offending key.
  void validate() const;

  /// Full-scale defaults: 252 px, 18x18 grid, 128 query points.
  static RunConfig full_scale();
};

nlohmann::json config_to_json(const RunConfig& config);
/// Unknown keys are rejected with kConfig.
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path);
/// Applies `key=value`; the value is parsed with the type of the key.
void apply_override(RunConfig& config, const std::string& assignment);

/// Git-style content hash of the canonical JSON form.
std::string config_hash(const RunConfig& config);

}  // namespace mptrack::app
