// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

// Independent reference implementations used by the unit and acceptance
// tests. Everything here is written as plain loops over scalars so that it
// shares no code path with the library.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <torch/torch.h>

#include "mptrack/common/rng.hpp"
#include "mptrack/metrics/evaluation.hpp"
#include "mptrack/synthdata/box.hpp"

namespace mptrack::oracle {

inline double box_iou(const Box& a, const Box& b) {
  const double ix0 = a.x0 > b.x0 ? a.x0 : b.x0;
  const double iy0 = a.y0 > b.y0 ? a.y0 : b.y0;
  const double ix1 = a.x1 < b.x1 ? a.x1 : b.x1;
  const double iy1 = a.y1 < b.y1 ? a.y1 : b.y1;
  const double w = ix1 - ix0;
  const double h = iy1 - iy0;
  const double inter = (w > 0.0 && h > 0.0) ? w * h : 0.0;
  const double area_a = (a.x1 - a.x0) * (a.y1 - a.y0);
  const double area_b = (b.x1 - b.x0) * (b.y1 - b.y0);
  const double uni = area_a + area_b - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

inline double center_dist(const Box& a, const Box& b) {
  const double dx = 0.5 * (a.x0 + a.x1) - 0.5 * (b.x0 + b.x1);
  const double dy = 0.5 * (a.y0 + a.y1) - 0.5 * (b.y0 + b.y1);
  return std::hypot(dx, dy);
}

struct Scores {
  double suc = 0, pr = 0, npr = 0, ao = 0, op50 = 0;
};

/// Frame-by-frame recomputation of the five benchmark scalars.
inline Scores eval_frames(const std::vector<Box>& pred, const std::vector<Box>& gt,
                          double pr_px = 20.0, double npr_thr = 0.2) {
  Scores s;
  const std::size_t n = gt.size();
  if (n == 0) return s;
  std::vector<double> ious;
  std::size_t pr_hits = 0, npr_hits = 0, op_hits = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double o = box_iou(pred[t], gt[t]);
    ious.push_back(o);
    const double d = center_dist(pred[t], gt[t]);
    const double diag = std::hypot(gt[t].x1 - gt[t].x0, gt[t].y1 - gt[t].y0);
    if (d <= pr_px) ++pr_hits;
    if (d / diag <= npr_thr) ++npr_hits;
    if (o > 0.5) ++op_hits;
  }
  double suc = 0.0;
  for (int k = 0; k <= 20; ++k) {
    const double thr = k / 20.0;
    std::size_t hits = 0;
    for (double o : ious) {
      if (o >= thr) ++hits;
    }
    suc += static_cast<double>(hits) / static_cast<double>(n);
  }
  s.suc = suc / 21.0;
  s.pr = static_cast<double>(pr_hits) / static_cast<double>(n);
  s.npr = static_cast<double>(npr_hits) / static_cast<double>(n);
  s.op50 = static_cast<double>(op_hits) / static_cast<double>(n);
  double sum = 0.0;
  for (double o : ious) sum += o;
  s.ao = sum / static_cast<double>(n);
  return s;
}

/// p[b, i, j] = sum_c omega[b, c] * z[b, c, i, j], accumulated in double.
inline torch::Tensor classify(const torch::Tensor& omega, const torch::Tensor& z) {
  const auto w = omega.to(torch::kDouble).contiguous();
  const auto f = z.to(torch::kDouble).contiguous();
  const int64_t B = f.size(0), C = f.size(1), H = f.size(2), W = f.size(3);
  auto out = torch::zeros({B, H, W}, torch::kDouble);
  auto wa = w.accessor<double, 2>();
  auto fa = f.accessor<double, 4>();
  auto oa = out.accessor<double, 3>();
  for (int64_t b = 0; b < B; ++b) {
    for (int64_t i = 0; i < H; ++i) {
      for (int64_t j = 0; j < W; ++j) {
        double acc = 0.0;
        for (int64_t c = 0; c < C; ++c) acc += wa[b][c] * fa[b][c][i][j];
        oa[b][i][j] = acc;
      }
    }
  }
  return out;
}

/// (omega * z) . z: the score map multiplied into every channel of z.
inline torch::Tensor modulate(const torch::Tensor& omega, const torch::Tensor& z) {
  const auto p = classify(omega, z);
  const auto f = z.to(torch::kDouble).contiguous();
  const int64_t B = f.size(0), C = f.size(1), H = f.size(2), W = f.size(3);
  auto out = torch::zeros({B, C, H, W}, torch::kDouble);
  auto pa = p.accessor<double, 3>();
  auto fa = f.accessor<double, 4>();
  auto oa = out.accessor<double, 4>();
  for (int64_t b = 0; b < B; ++b) {
    for (int64_t c = 0; c < C; ++c) {
      for (int64_t i = 0; i < H; ++i) {
        for (int64_t j = 0; j < W; ++j) oa[b][c][i][j] = pa[b][i][j] * fa[b][c][i][j];
      }
    }
  }
  return out;
}

/// Max |a - b| over all elements.
inline double max_abs_diff(const torch::Tensor& a, const torch::Tensor& b) {
  return (a.to(torch::kDouble) - b.to(torch::kDouble)).abs().max().item<double>();
}

/// Relative error ||g_analytic - g_fd|| / max(||g_analytic||, ||g_fd||) of
/// the gradient of `f` at `x` (float64), with central differences of step h.
inline double gradient_rel_error(const std::function<torch::Tensor(const torch::Tensor&)>& f,
                                 const torch::Tensor& x0, double h = 1e-4) {
  auto x = x0.detach().to(torch::kDouble).clone().requires_grad_(true);
  auto y = f(x);
  auto analytic = torch::autograd::grad({y}, {x}, {}, false, false, true)[0];
  if (!analytic.defined()) analytic = torch::zeros_like(x);
  analytic = analytic.detach().reshape({-1});

  auto flat = x0.detach().to(torch::kDouble).clone().reshape({-1});
  auto numeric = torch::zeros_like(flat);
  torch::NoGradGuard guard;
  for (int64_t i = 0; i < flat.numel(); ++i) {
    const double v = flat[i].item<double>();
    flat[i] = v + h;
    const double fp = f(flat.reshape(x0.sizes())).item<double>();
    flat[i] = v - h;
    const double fm = f(flat.reshape(x0.sizes())).item<double>();
    flat[i] = v;
    numeric[i] = (fp - fm) / (2.0 * h);
  }
  const double num = (analytic - numeric).norm().item<double>();
  const double den = std::max({analytic.norm().item<double>(), numeric.norm().item<double>(),
                               1e-300});
  return num / den;
}

/// Same relative error for the gradient of a scalar `loss()` with respect to
/// `count` randomly chosen entries of `params` (all float64), perturbed in
/// place.
inline double parameter_gradient_rel_error(const std::function<torch::Tensor()>& loss,
                                           std::vector<torch::Tensor> params, int count, Rng& rng,
                                           double h = 1e-4) {
  for (auto& p : params) {
    if (p.grad().defined()) p.mutable_grad().zero_();
  }
  loss().backward();
  std::vector<double> analytic, numeric;
  for (int k = 0; k < count; ++k) {
    auto& p = params[uniform_int(rng, 0, static_cast<int>(params.size()) - 1)];
    const int64_t i = uniform_int(rng, 0, static_cast<int>(p.numel()) - 1);
    const auto g = p.grad().defined() ? p.grad().reshape({-1})[i].item<double>() : 0.0;
    analytic.push_back(g);
    torch::NoGradGuard guard;
    auto flat = p.view({-1});
    const double v = flat[i].item<double>();
    flat[i] = v + h;
    const double fp = loss().item<double>();
    flat[i] = v - h;
    const double fm = loss().item<double>();
    flat[i] = v;
    numeric.push_back((fp - fm) / (2.0 * h));
  }
  double diff = 0, na = 0, nn = 0;
  for (std::size_t k = 0; k < analytic.size(); ++k) {
    diff += (analytic[k] - numeric[k]) * (analytic[k] - numeric[k]);
    na += analytic[k] * analytic[k];
    nn += numeric[k] * numeric[k];
  }
  return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nn), 1e-300});
}

/// Fraction of target-box pixels (pixel centers) not covered by any
/// occluder, by direct counting on the integer pixel lattice.
inline double pixel_visibility(const Box& target, const std::vector<Box>& occluders) {
  long total = 0, visible = 0;
  for (int y = static_cast<int>(std::floor(target.y0)); y < static_cast<int>(std::ceil(target.y1));
       ++y) {
    for (int x = static_cast<int>(std::floor(target.x0));
         x < static_cast<int>(std::ceil(target.x1)); ++x) {
      const double cx = x + 0.5, cy = y + 0.5;
      if (!(cx >= target.x0 && cx < target.x1 && cy >= target.y0 && cy < target.y1)) continue;
      ++total;
      bool covered = false;
      for (const auto& o : occluders) {
        if (cx >= o.x0 && cx < o.x1 && cy >= o.y0 && cy < o.y1) {
          covered = true;
          break;
        }
      }
      if (!covered) ++visible;
    }
  }
  return total > 0 ? static_cast<double>(visible) / static_cast<double>(total) : 1.0;
}

inline Box random_box(Rng& rng, double extent, bool integer_grid) {
  if (integer_grid) {
    const int x0 = uniform_int(rng, 0, static_cast<int>(extent) - 8);
    const int y0 = uniform_int(rng, 0, static_cast<int>(extent) - 8);
    const int w = uniform_int(rng, 4, 40);
    const int h = uniform_int(rng, 4, 40);
    return {double(x0), double(y0), double(x0 + w), double(y0 + h)};
  }
  const double x0 = uniform(rng, 0.0, extent - 8.0);
  const double y0 = uniform(rng, 0.0, extent - 8.0);
  return {x0, y0, x0 + uniform(rng, 2.0, 60.0), y0 + uniform(rng, 2.0, 60.0)};
}

}  // namespace mptrack::oracle
