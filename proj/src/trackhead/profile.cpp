// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "mptrack/trackhead/profile.hpp"

#include "mptrack/common/error.hpp"

namespace mptrack::head {

void ModelProfile::validate() const {
  require(image_size > 0 && grid > 0 && channels > 0, ErrorCategory::kConfig,
          "profile: image_size, grid and channels must be positive");
  require(image_size % grid == 0, ErrorCategory::kConfig,
          "profile.image_size must be divisible by profile.grid");
  require(stride() % 2 == 0, ErrorCategory::kConfig,
          "profile: stride (image_size / grid) must be even");
  require(channels % 4 == 0, ErrorCategory::kConfig,
          "profile.channels must be divisible by the 4 attention heads");
}

nlohmann::json profile_to_json(const ModelProfile& p) {
  return {{"image_size", p.image_size},
          {"grid", p.grid},
          {"channels", p.channels},
          {"stride", p.stride()}};
}

ModelProfile profile_from_json(const nlohmann::json& j) {
  ModelProfile p;
  p.image_size = j.at("image_size").get<int>();
  p.grid = j.at("grid").get<int>();
  p.channels = j.at("channels").get<int>();
  return p;
}

}  // namespace mptrack::head
