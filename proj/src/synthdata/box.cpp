// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "mptrack/synthdata/box.hpp"

#include <algorithm>

namespace mptrack {

Box translated(const Box& box, double dx, double dy) {
  return {box.x0 + dx, box.y0 + dy, box.x1 + dx, box.y1 + dy};
}

Box clipped(const Box& box, double image_width, double image_height) {
  return {std::clamp(box.x0, 0.0, image_width),
          std::clamp(box.y0, 0.0, image_height),
          std::clamp(box.x1, 0.0, image_width),
          std::clamp(box.y1, 0.0, image_height)};
}

double intersection_area(const Box& a, const Box& b) {
  const double w = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
  const double h = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
  return (w > 0.0 && h > 0.0) ? w * h : 0.0;
}

}  // namespace mptrack
