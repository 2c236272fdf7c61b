// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "json.hpp"
#include "mptrack/synthdata/labels.hpp"

namespace mptrack::head {

/// Fixed geometry of a model: image side, token grid side and channel count.
struct ModelProfile {
  int image_size = 252;
  int grid = 18;
  int channels = 64;

  int stride() const { return image_size / grid; }
  synth::GridSpec grid_spec() const { return {grid, grid, stride()}; }

  /// 252 px / 18x18 grid / 64 channels.
  static ModelProfile standard() { return {252, 18, 64}; }
  /// 126 px / 9x9 grid / 64 channels, for fast experiments and tests.
  static ModelProfile small() { return {126, 9, 64}; }

  void validate() const;

  friend bool operator==(const ModelProfile&, const ModelProfile&) = default;
};

nlohmann::json profile_to_json(const ModelProfile& p);
ModelProfile profile_from_json(const nlohmann::json& j);

}  // namespace mptrack::head
