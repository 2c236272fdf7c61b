// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "mptrack/jepa/corruption.hpp"

#include <cmath>
#include <numeric>

#include "mptrack/common/error.hpp"

namespace mptrack::jepa {
namespace {

/// First k entries of a uniformly random permutation of [0, n).
std::vector<int> sample_distinct(int n, int k, Rng& rng) {
  std::vector<int> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < k; ++i) {
    const int j = uniform_int(rng, i, n - 1);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

}  // namespace

std::pair<torch::Tensor, CorruptionLog> corrupt_features(const torch::Tensor& features,
                                                         double rho_max, Rng& rng,
                                                         CorruptionKind kind) {
  require(rho_max >= 0.0 && rho_max <= 1.0, ErrorCategory::kConfig,
          "rho_max must be in [0, 1], got " + std::to_string(rho_max));
  require(features.dim() == 3, ErrorCategory::kShape,
          "corrupt_features: expected a [C, H, W] feature map");
  const int cells = static_cast<int>(features.size(1) * features.size(2));
  CorruptionLog log;
  log.rho = rho_max > 0.0 ? uniform(rng, 0.0, rho_max) : 0.0;
  log.k = static_cast<int>(std::floor(log.rho * cells));
  log.sources = sample_distinct(cells, log.k, rng);
  log.targets = sample_distinct(cells, log.k, rng);

  const auto flat = features.reshape({features.size(0), cells});
  auto out = flat.clone();
  if (log.k > 0) {
    const auto tgt = torch::tensor(log.targets, torch::kLong);
    if (kind == CorruptionKind::kCopyPaste) {
      const auto src = torch::tensor(log.sources, torch::kLong);
      out.index_copy_(1, tgt, flat.index_select(1, src));
    } else {
      out.index_fill_(1, tgt, 0.0);
    }
  }
  return {out.reshape(features.sizes()), std::move(log)};
}

torch::Tensor corrupt_batch(const torch::Tensor& features, double rho_max, Rng& rng,
                            CorruptionKind kind, std::vector<CorruptionLog>* logs) {
  require(features.dim() == 4, ErrorCategory::kShape,
          "corrupt_batch: expected [B, C, H, W] features");
  std::vector<torch::Tensor> out;
  for (int64_t b = 0; b < features.size(0); ++b) {
    auto [map, log] = corrupt_features(features[b], rho_max, rng, kind);
    out.push_back(map);
    if (logs != nullptr) logs->push_back(std::move(log));
  }
  return torch::stack(out);
}

}  // namespace mptrack::jepa
