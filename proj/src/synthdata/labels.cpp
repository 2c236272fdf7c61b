// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "mptrack/synthdata/labels.hpp"

#include <cmath>

#include "mptrack/common/error.hpp"

namespace mptrack::synth {
namespace {

void check_box(const Box& box, const GridSpec& grid) {
  require(grid.height > 0 && grid.width > 0 && grid.stride > 0,
          ErrorCategory::kConfig, "grid dimensions must be positive");
  const double w = static_cast<double>(grid.width) * grid.stride;
  const double h = static_cast<double>(grid.height) * grid.stride;
  require(box.inside(w, h), ErrorCategory::kDomain,
          "box outside image: [" + std::to_string(box.x0) + ", " +
              std::to_string(box.y0) + ", " + std::to_string(box.x1) + ", " +
              std::to_string(box.y1) + "]");
}

}  // namespace

ScoreMapLabel encode_cls_label(const Box& box, const GridSpec& grid, double sigma) {
  check_box(box, grid);
  require(sigma > 0.0, ErrorCategory::kConfig, "label sigma must be positive");
  // Box center expressed in cell units, where cell (i, j) has center (j, i).
  const double cx = box.center_x() / grid.stride - 0.5;
  const double cy = box.center_y() / grid.stride - 0.5;
  auto values = torch::empty({grid.height, grid.width}, torch::kFloat64);
  auto acc = values.accessor<double, 2>();
  double peak = 0.0;
  for (int i = 0; i < grid.height; ++i) {
    for (int j = 0; j < grid.width; ++j) {
      const double d2 = (j - cx) * (j - cx) + (i - cy) * (i - cy);
      acc[i][j] = std::exp(-d2 / (2.0 * sigma * sigma));
      peak = std::max(peak, acc[i][j]);
    }
  }
  values.div_(peak);
  return {values.to(torch::kFloat32)};
}

RegMapLabel encode_reg_label(const Box& box, const GridSpec& grid) {
  check_box(box, grid);
  auto values = torch::empty({4, grid.height, grid.width}, torch::kFloat32);
  auto mask = torch::empty({grid.height, grid.width}, torch::kBool);
  auto v = values.accessor<float, 3>();
  auto m = mask.accessor<bool, 2>();
  const double s = grid.stride;
  for (int i = 0; i < grid.height; ++i) {
    for (int j = 0; j < grid.width; ++j) {
      const double cx = cell_center(j, grid.stride);
      const double cy = cell_center(i, grid.stride);
      v[0][i][j] = static_cast<float>((cx - box.x0) / s);
      v[1][i][j] = static_cast<float>((cy - box.y0) / s);
      v[2][i][j] = static_cast<float>((box.x1 - cx) / s);
      v[3][i][j] = static_cast<float>((box.y1 - cy) / s);
      m[i][j] = box.contains(cx, cy);
    }
  }
  return {values, mask};
}

}  // namespace mptrack::synth
