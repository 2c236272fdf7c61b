// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "mptrack/synthdata/box.hpp"

namespace mptrack::metrics {

/// Intersection over union; 0 for disjoint boxes.
double iou(const Box& a, const Box& b);

/// 1 - GIoU, in [0, 2).
double giou_loss(const Box& pred, const Box& gt);

double center_distance(const Box& a, const Box& b);

}  // namespace mptrack::metrics
