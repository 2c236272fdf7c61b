// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mptrack/jepa/corruption.hpp"
#include "mptrack/jepa/losses.hpp"
#include "mptrack/jepa/student.hpp"
#include "mptrack/synthdata/dataset.hpp"
#include "mptrack/trackhead/feature_bank.hpp"

namespace mptrack::jepa {

inline constexpr double kCollapseStdFloor = 1e-3;

struct PretrainConfig {
  double alpha = kDefaultAlpha;
  double beta = kDefaultBeta;
  double rho_max = kDefaultRhoMax;
  CorruptionKind corruption = CorruptionKind::kCopyPaste;
  double lr_base = 1e-4;       // student label encoder + predictor
  double lr_projection = 1e-3; // ProjNet and Expander
  double weight_decay = 1e-2;
  double warmup_fraction = 0.1;  // linear warmup, then cosine decay to zero
  int epochs = 1;
  int batch_size = 16;
  std::uint64_t seed = 0;
};

struct PretrainLogRecord {
  int step = 0;
  JepaLossReport losses;
  double omega_std_min = 0.0;   // min over dims of the batch std of omega
  double omega_std_mean = 0.0;
};

struct HeldoutStats {
  double l_inv = 0.0;
  double l_cov = 0.0;
  double exp_std_min = 0.0;  // min over dims of the batch std of omega_exp
};

struct PretrainResult {
  std::vector<PretrainLogRecord> log;
  std::vector<HeldoutStats> heldout;  // before training, then after each epoch
  double min_heldout_exp_std = 0.0;
  bool collapsed = false;
  std::string teacher_hash_before;
  std::string teacher_hash_after;
};

/// Builds the JEPA report with l_mp recomputed in double from the reported
/// components, so the accounting identity holds exactly.
JepaLossReport make_report(const torch::Tensor& l_inv, const torch::Tensor& l_cov, double alpha,
                           double beta);

/// Held-out invariance loss and collapse diagnostic with a fixed corruption
/// stream derived from `seed`.
/// Learning-rate multiplier at `step` (0-based): linear warmup over the first
/// `warmup_fraction` of `total_steps`, then cosine decay to zero.
double lr_factor(int step, int total_steps, double warmup_fraction);

HeldoutStats evaluate_heldout(JepaModel& model, const head::FeatureBank& bank,
                              std::span<const synth::WindowSpec> windows,
                              const PretrainConfig& config, std::uint64_t seed);

/// Trains student predictor, ProjNet and Expander against the frozen
/// teacher. Throws kDivergence (with the step index) on a non-finite loss.
PretrainResult pretrain(JepaModel& model, const head::FeatureBank& train,
                        std::span<const synth::WindowSpec> train_windows,
                        const head::FeatureBank& heldout,
                        std::span<const synth::WindowSpec> heldout_windows,
                        const PretrainConfig& config);

}  // namespace mptrack::jepa
