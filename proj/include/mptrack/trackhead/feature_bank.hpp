// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include <torch/torch.h>

#include "mptrack/synthdata/dataset.hpp"
#include "mptrack/trackhead/tracker_net.hpp"

namespace mptrack::head {

/// Frozen-encoder features for every frame of a set of sequences.
struct FeatureBank {
  const std::vector<synth::SyntheticSequence>* sequences = nullptr;
  std::vector<torch::Tensor> features;  // per sequence [T, C, H, W]
};

FeatureBank encode_sequences(TrackerNet& net, const std::vector<synth::SyntheticSequence>& seqs,
                             int batch_size = 32);

/// A batch of training windows: references at window frames 1 and 5,
/// current frame 8.
struct WindowBatch {
  ReferenceSet refs;
  torch::Tensor cur;  // [B, C, H, W]
  std::vector<Box> cur_boxes;
  LabelBatch cur_labels;
};

WindowBatch gather_windows(const FeatureBank& bank, std::span<const synth::WindowSpec> windows,
                           const synth::GridSpec& grid);

}  // namespace mptrack::head
