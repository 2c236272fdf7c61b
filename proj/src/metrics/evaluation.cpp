// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "mptrack/metrics/evaluation.hpp"

#include <fstream>

#include "mptrack/common/error.hpp"
#include "mptrack/metrics/geometry.hpp"

namespace mptrack::metrics {
namespace {

constexpr int kPrecisionCurveMaxPx = 50;
constexpr int kNormalizedCurveSteps = 50;  // thresholds k / 100, k = 0..50

}  // namespace

MetricReport eval_sequence(std::span<const FramePrediction> preds, std::span<const Box> gts,
                           const EvalOptions& options) {
  require(preds.size() == gts.size(), ErrorCategory::kDomain,
          "eval_sequence: " + std::to_string(preds.size()) + " predictions for " +
              std::to_string(gts.size()) + " ground-truth frames");
  MetricReport r;
  r.frames = static_cast<int>(gts.size());
  const std::size_t n = gts.size();
  std::vector<double> ious(n), dists(n), ndists(n);
  for (std::size_t t = 0; t < n; ++t) {
    ious[t] = iou(preds[t].box, gts[t]);
    dists[t] = center_distance(preds[t].box, gts[t]);
    ndists[t] = dists[t] / gts[t].diagonal();
  }
  auto rate = [n](const std::vector<double>& v, auto&& pass) {
    if (n == 0) return 0.0;
    std::size_t hits = 0;
    for (double x : v) hits += pass(x) ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(n);
  };

  double suc_sum = 0.0;
  for (int k = 0; k <= kSuccessSteps; ++k) {
    const double thr = static_cast<double>(k) / kSuccessSteps;
    const double s = rate(ious, [thr](double x) { return x >= thr; });
    r.suc_curve.emplace_back(thr, s);
    suc_sum += s;
  }
  r.suc = suc_sum / (kSuccessSteps + 1);
  for (int px = 0; px <= kPrecisionCurveMaxPx; ++px) {
    const double thr = px;
    r.pr_curve.emplace_back(thr, rate(dists, [thr](double x) { return x <= thr; }));
  }
  for (int k = 0; k <= kNormalizedCurveSteps; ++k) {
    const double thr = static_cast<double>(k) / 100.0;
    r.npr_curve.emplace_back(thr, rate(ndists, [thr](double x) { return x <= thr; }));
  }
  const double pr_thr = options.precision_threshold_px;
  const double npr_thr = options.normalized_threshold;
  r.pr = rate(dists, [pr_thr](double x) { return x <= pr_thr; });
  r.npr = rate(ndists, [npr_thr](double x) { return x <= npr_thr; });
  r.op50 = rate(ious, [](double x) { return x > 0.5; });
  double iou_sum = 0.0;
  for (double x : ious) iou_sum += x;
  r.ao = n > 0 ? iou_sum / static_cast<double>(n) : 0.0;
  return r;
}

MetricReport eval_sequence_subset(std::span<const FramePrediction> preds,
                                  std::span<const Box> gts, const std::vector<bool>& mask,
                                  const EvalOptions& options) {
  require(preds.size() == gts.size() && mask.size() == gts.size(), ErrorCategory::kDomain,
          "eval_sequence_subset: length mismatch");
  std::vector<FramePrediction> p;
  std::vector<Box> g;
  for (std::size_t t = 0; t < gts.size(); ++t) {
    if (!mask[t]) continue;
    p.push_back(preds[t]);
    g.push_back(gts[t]);
  }
  return eval_sequence(p, g, options);
}

MetricReport average_reports(std::span<const MetricReport> reports) {
  MetricReport out;
  if (reports.empty()) return out;
  out = reports.front();
  for (std::size_t i = 1; i < reports.size(); ++i) {
    const auto& r = reports[i];
    out.frames += r.frames;
    out.suc += r.suc;
    out.pr += r.pr;
    out.npr += r.npr;
    out.ao += r.ao;
    out.op50 += r.op50;
    for (std::size_t k = 0; k < out.suc_curve.size(); ++k) out.suc_curve[k].second += r.suc_curve[k].second;
    for (std::size_t k = 0; k < out.pr_curve.size(); ++k) out.pr_curve[k].second += r.pr_curve[k].second;
    for (std::size_t k = 0; k < out.npr_curve.size(); ++k) out.npr_curve[k].second += r.npr_curve[k].second;
  }
  const double n = static_cast<double>(reports.size());
  out.suc /= n;
  out.pr /= n;
  out.npr /= n;
  out.ao /= n;
  out.op50 /= n;
  for (auto& c : out.suc_curve) c.second /= n;
  for (auto& c : out.pr_curve) c.second /= n;
  for (auto& c : out.npr_curve) c.second /= n;
  return out;
}

nlohmann::json report_to_json(const MetricReport& r) {
  return {{"frames", r.frames}, {"suc", r.suc}, {"pr", r.pr},
          {"npr", r.npr},       {"ao", r.ao},   {"op50", r.op50}};
}

void write_curve_tables(const MetricReport& report, const std::filesystem::path& dir,
                        const std::string& stem) {
  std::filesystem::create_directories(dir);
  auto write = [&](const Curve& curve, const std::string& suffix, const char* header) {
    const auto path = dir / (stem + "_" + suffix + ".csv");
    std::ofstream out(path);
    require(out.good(), ErrorCategory::kIo, "cannot write " + path.string());
    out << header << "\n";
    for (const auto& [thr, value] : curve) out << thr << "," << value << "\n";
  };
  write(report.suc_curve, "suc", "iou_threshold,success_rate");
  write(report.pr_curve, "pr", "distance_px,precision");
  write(report.npr_curve, "npr", "normalized_distance,precision");
}

}  // namespace mptrack::metrics
