// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "json.hpp"
#include "mptrack/synthdata/box.hpp"

namespace mptrack::metrics {

inline constexpr double kPrecisionThresholdPx = 20.0;
inline constexpr double kNormalizedPrecisionThreshold = 0.2;
inline constexpr int kSuccessSteps = 20;  // thresholds k / 20, k = 0..20

struct FramePrediction {
  Box box;
  double score = 0.0;
};

struct EvalOptions {
  double precision_threshold_px = kPrecisionThresholdPx;
  double normalized_threshold = kNormalizedPrecisionThreshold;
};

using Curve = std::vector<std::pair<double, double>>;  // threshold -> rate

struct MetricReport {
  int frames = 0;
  double suc = 0.0;   // mean success over IoU thresholds 0, 0.05, ..., 1
  double pr = 0.0;    // center error <= T px
  double npr = 0.0;   // center error / gt diagonal <= threshold
  double ao = 0.0;    // mean IoU
  double op50 = 0.0;  // IoU > 0.5
  Curve suc_curve;
  Curve pr_curve;
  Curve npr_curve;
};

/// Success uses IoU >= threshold, distance rules use <=, OP50 uses a strict
/// IoU > 0.5. Throws kDomain on a length mismatch.
MetricReport eval_sequence(std::span<const FramePrediction> preds, std::span<const Box> gts,
                           const EvalOptions& options = {});

/// Frame subset selected by `mask` (e.g. frames carrying an attribute).
MetricReport eval_sequence_subset(std::span<const FramePrediction> preds,
                                  std::span<const Box> gts, const std::vector<bool>& mask,
                                  const EvalOptions& options = {});

/// Mean of per-sequence scalars and curves.
MetricReport average_reports(std::span<const MetricReport> reports);

nlohmann::json report_to_json(const MetricReport& report);

/// One CSV per curve: `<stem>_suc.csv`, `<stem>_pr.csv`, `<stem>_npr.csv`.
void write_curve_tables(const MetricReport& report, const std::filesystem::path& dir,
                        const std::string& stem);

}  // namespace mptrack::metrics
