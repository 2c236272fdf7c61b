// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "mptrack/occusolver/energy.hpp"

#include "mptrack/common/error.hpp"

namespace mptrack::occu {

torch::Tensor map_points_to_energy(const torch::Tensor& coords, const torch::Tensor& visible,
                                   const synth::GridSpec& grid, double sigma, int* clamped) {
  require(coords.dim() == 3 && coords.size(2) == 2, ErrorCategory::kShape,
          "map_points_to_energy: coords must be [B, P, 2]");
  require(visible.dim() == 2 && visible.size(0) == coords.size(0) &&
              visible.size(1) == coords.size(1),
          ErrorCategory::kShape, "map_points_to_energy: visibility must be [B, P]");
  require(sigma > 0.0, ErrorCategory::kDomain, "map_points_to_energy: sigma must be > 0");
  const double s = grid.stride;
  const double max_x = grid.width * s;
  const double max_y = grid.height * s;
  auto c = coords.detach().to(torch::kFloat64);
  auto x = c.select(2, 0);
  auto y = c.select(2, 1);
  if (clamped != nullptr) {
    auto outside = (x < 0.0) | (x > max_x) | (y < 0.0) | (y > max_y);
    *clamped += static_cast<int>(outside.sum().item<int64_t>());
  }
  // Grid location in cell units: cell (i, j) center sits at integer (j, i).
  auto u = x.clamp(0.0, max_x) / s - 0.5;
  auto v = y.clamp(0.0, max_y) / s - 0.5;
  auto opts = torch::TensorOptions().dtype(torch::kFloat64);
  auto jj = torch::arange(grid.width, opts).view({1, 1, 1, grid.width});
  auto ii = torch::arange(grid.height, opts).view({1, 1, grid.height, 1});
  auto du = jj - u.unsqueeze(-1).unsqueeze(-1);
  auto dv = ii - v.unsqueeze(-1).unsqueeze(-1);
  auto e = torch::exp(-(du * du + dv * dv) / (2.0 * sigma * sigma));
  // On the 2^-24 lattice both e and 1 - e are exact in float32, so flipping
  // visibility is an exact involution.
  constexpr double kLattice = 16777216.0;
  e = (torch::round(e * kLattice) / kLattice).to(torch::kFloat32);
  auto vis = visible.to(torch::kBool).unsqueeze(-1).unsqueeze(-1);
  return torch::where(vis, e, 1.0f - e);
}

}  // namespace mptrack::occu
