// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>

namespace mptrack {

/// Axis-aligned box in pixels, corner convention (x0, y0) top-left,
/// (x1, y1) bottom-right.
struct Box {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
  double center_x() const { return 0.5 * (x0 + x1); }
  double center_y() const { return 0.5 * (y0 + y1); }
  double diagonal() const { return std::hypot(width(), height()); }

  bool valid() const {
    return std::isfinite(x0) && std::isfinite(y0) && std::isfinite(x1) &&
           std::isfinite(y1) && x1 > x0 && y1 > y0;
  }

  /// True when the box lies within [0, width] x [0, height].
  bool inside(double image_width, double image_height) const {
    return valid() && x0 >= 0.0 && y0 >= 0.0 && x1 <= image_width &&
           y1 <= image_height;
  }

  bool contains(double x, double y) const {
    return x >= x0 && x <= x1 && y >= y0 && y <= y1;
  }

  friend bool operator==(const Box&, const Box&) = default;
};

Box translated(const Box& box, double dx, double dy);
Box clipped(const Box& box, double image_width, double image_height);
double intersection_area(const Box& a, const Box& b);

}  // namespace mptrack
