// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "mptrack/trackhead/feature_bank.hpp"

#include <algorithm>

#include "mptrack/common/error.hpp"

namespace mptrack::head {

FeatureBank encode_sequences(TrackerNet& net, const std::vector<synth::SyntheticSequence>& seqs,
                             int batch_size) {
  torch::NoGradGuard no_grad;
  FeatureBank bank;
  bank.sequences = &seqs;
  for (const auto& seq : seqs) {
    std::vector<torch::Tensor> chunks;
    for (int t0 = 0; t0 < seq.num_frames(); t0 += batch_size) {
      const int t1 = std::min(seq.num_frames(), t0 + batch_size);
      std::vector<const synth::Image*> imgs;
      for (int t = t0; t < t1; ++t) imgs.push_back(&seq.frames[t]);
      chunks.push_back(net->encode_frame(image_batch(imgs)));
    }
    bank.features.push_back(torch::cat(chunks));
  }
  return bank;
}

WindowBatch gather_windows(const FeatureBank& bank, std::span<const synth::WindowSpec> windows,
                           const synth::GridSpec& grid) {
  require(bank.sequences != nullptr && !windows.empty(), ErrorCategory::kState,
          "gather_windows: empty bank or window list");
  std::vector<torch::Tensor> fa, fb, fc;
  std::vector<Box> ba, bb, bc;
  for (const auto& w : windows) {
    const auto& seq = (*bank.sequences)[w.sequence];
    const auto& feats = bank.features[w.sequence];
    fa.push_back(feats[w.reference_a()]);
    fb.push_back(feats[w.reference_b()]);
    fc.push_back(feats[w.current()]);
    ba.push_back(seq.gt_boxes[w.reference_a()]);
    bb.push_back(seq.gt_boxes[w.reference_b()]);
    bc.push_back(seq.gt_boxes[w.current()]);
  }
  WindowBatch batch;
  batch.refs = make_reference_set(torch::stack(fa), torch::stack(fb), ba, bb, grid);
  batch.cur = torch::stack(fc);
  batch.cur_labels = encode_label_batch(bc, grid);
  batch.cur_boxes = std::move(bc);
  return batch;
}

}  // namespace mptrack::head
