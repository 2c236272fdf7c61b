// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "mptrack/app/checkpoint.hpp"
#include "mptrack/app/config.hpp"
#include "mptrack/app/training.hpp"

namespace mptrack::app {

// Checkpoint metadata and typed save/load.

Checkpoint make_checkpoint(const std::string& kind, const RunConfig& config);

/// Throws kInit when the checkpoint profile differs from `config`.
void check_profile(const Checkpoint& ckpt, const RunConfig& config);

void add_trackhead(Checkpoint& ckpt, head::TrackerNet& net);
head::TrackerNet load_trackhead(const Checkpoint& ckpt, const RunConfig& config);

void add_point_tracker(Checkpoint& ckpt, occu::PointTracker& tracker);
occu::PointTracker load_point_tracker(const Checkpoint& ckpt, const RunConfig& config);

void add_jepa(Checkpoint& ckpt, head::TrackerNet& student, jepa::Expander& expander);
/// Student network with its ProjNet.
head::TrackerNet load_jepa_student(const Checkpoint& ckpt, const RunConfig& config);

void add_occusolver(Checkpoint& ckpt, occu::OccuSolver& solver);
/// Empty holder when the checkpoint has no OccuSolver entries.
occu::OccuSolver load_occusolver(const Checkpoint& ckpt, const RunConfig& config);

// Track results as JSON lines: frame, box, score, visible_fraction, active.

void write_track_result(const runtime::TrackResult& result, const std::filesystem::path& path);
runtime::TrackResult read_track_result(const std::filesystem::path& path);

// Ablation matrix.

inline const std::vector<std::string> kAblationVariants = {"baseline", "baseline+occu",
                                                           "inv-only", "inv+cov", "full"};

struct VariantMetrics {
  metrics::MetricReport overall;
  metrics::MetricReport heavy;
};

struct SeedOutcome {
  std::uint64_t seed = 0;
  std::map<std::string, VariantMetrics> variants;
  jepa::PretrainResult pretrain_full;      // inv + cov
  jepa::PretrainResult pretrain_inv_only;  // beta = 0
  VisibilityAccuracy visibility;           // full model, held-out windows
  int recovery_total = 0;
  int recovery_hits = 0;
  double seconds_pretrain = 0.0;
};

struct Stage0Models {
  head::TrackerNet teacher{nullptr};
  occu::PointTracker tracker{nullptr};
};

struct AblationData {
  std::vector<synth::SyntheticSequence> train;
  std::vector<synth::SyntheticSequence> heldout;
  std::vector<synth::SyntheticSequence> eval;
  std::vector<synth::SyntheticSequence> occlusion;
};

AblationData make_ablation_data(const RunConfig& config);

Stage0Models run_stage0(const RunConfig& config, const AblationData& data);

/// All later stages and every variant for one seed (config.seed is
/// replaced by `seed`).
SeedOutcome run_ablation_seed(const RunConfig& config, std::uint64_t seed,
                              Stage0Models& stage0, const AblationData& data);

struct Summary {
  double mean = 0.0;
  double std = 0.0;
};

Summary summarize(const std::vector<double>& values);

/// One row per variant, mean and sample std of each metric over seeds.
nlohmann::json ablation_table(const std::vector<SeedOutcome>& outcomes);
std::string ablation_markdown(const std::vector<SeedOutcome>& outcomes);

nlohmann::json seed_outcome_json(const SeedOutcome& outcome);

}  // namespace mptrack::app
