// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include <torch/torch.h>

#include "mptrack/trackhead/tracker_net.hpp"

namespace mptrack::jepa {

/// Linear channel expansion C -> c_exp of a tracking model (a 1x1
/// convolution on a 1 x C map).
class ExpanderImpl : public torch::nn::Module {
 public:
  ExpanderImpl(int64_t channels, int64_t expanded, bool bias = true);

  torch::Tensor forward(const torch::Tensor& omega);

  int64_t expanded() const { return expanded_; }

 private:
  int64_t channels_;
  int64_t expanded_;
  torch::nn::Linear linear_{nullptr};
};
TORCH_MODULE(Expander);

/// Teacher/student pair for model-predictive pretraining. The teacher is a
/// frozen tracker; the student starts as a copy with an identity ProjNet.
class JepaModel {
 public:
  /// Throws kInit when `teacher` is empty.
  JepaModel(head::TrackerNet teacher, int64_t expansion_factor = 4, uint64_t seed = 0);

  /// omega_hat from the clean current frame; no gradient ever reaches the
  /// teacher.
  torch::Tensor teacher_predict(const head::ReferenceSet& refs, const torch::Tensor& cur_clean);

  /// omega = ProjNet(student predictor output).
  torch::Tensor student_predict(const head::ReferenceSet& refs,
                                const torch::Tensor& cur_corrupt);

  torch::Tensor expand(const torch::Tensor& omega) { return expander_(omega); }

  head::TrackerNet& teacher() { return teacher_; }
  head::TrackerNet& student() { return student_; }
  Expander& expander() { return expander_; }

  /// Content hash of the teacher parameters.
  std::string teacher_hash() const;

 private:
  head::TrackerNet teacher_{nullptr};
  head::TrackerNet student_{nullptr};
  Expander expander_{nullptr};
};

}  // namespace mptrack::jepa
