// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "mptrack/metrics/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace mptrack::metrics {

double iou(const Box& a, const Box& b) {
  const double inter = intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

double giou_loss(const Box& pred, const Box& gt) {
  const double inter = intersection_area(pred, gt);
  const double uni = pred.area() + gt.area() - inter;
  const double enclosing = (std::max(pred.x1, gt.x1) - std::min(pred.x0, gt.x0)) *
                           (std::max(pred.y1, gt.y1) - std::min(pred.y0, gt.y0));
  const double giou = inter / uni - (enclosing - uni) / enclosing;
  return 1.0 - giou;
}

double center_distance(const Box& a, const Box& b) {
  return std::hypot(a.center_x() - b.center_x(), a.center_y() - b.center_y());
}

}  // namespace mptrack::metrics
