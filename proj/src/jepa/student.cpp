// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "mptrack/jepa/student.hpp"

#include "mptrack/common/error.hpp"
#include "mptrack/common/hash.hpp"
#include "mptrack/nn/transformer.hpp"

namespace mptrack::jepa {

ExpanderImpl::ExpanderImpl(int64_t channels, int64_t expanded, bool bias)
    : channels_(channels), expanded_(expanded) {
  linear_ = register_module(
      "linear", torch::nn::Linear(torch::nn::LinearOptions(channels, expanded).bias(bias)));
  if (bias) {
    torch::NoGradGuard no_grad;
    linear_->bias.zero_();
  }
}

torch::Tensor ExpanderImpl::forward(const torch::Tensor& omega) {
  require(omega.dim() == 2 && omega.size(1) == channels_, ErrorCategory::kShape,
          "expand: expected [n, " + std::to_string(channels_) + "] tracking models");
  return linear_(omega);
}

JepaModel::JepaModel(head::TrackerNet teacher, int64_t expansion_factor, uint64_t seed) {
  require(!teacher.is_empty(), ErrorCategory::kInit,
          "pretraining needs a teacher tracker (run train-stage0 first)");
  teacher_ = std::move(teacher);
  teacher_->eval();
  nn::set_trainable(*teacher_, false);

  const auto& profile = teacher_->profile();
  torch::manual_seed(seed);
  const auto dtype = teacher_->parameters().front().scalar_type();
  student_ = head::TrackerNet(profile);
  if (teacher_->has_projnet()) student_->enable_projnet();
  student_->to(dtype);
  nn::copy_parameters(*teacher_, *student_);
  student_->enable_projnet();  // identity unless copied from the teacher
  student_->to(dtype);
  expander_ = Expander(profile.channels, expansion_factor * profile.channels);
  expander_->to(dtype);
}

torch::Tensor JepaModel::teacher_predict(const head::ReferenceSet& refs,
                                         const torch::Tensor& cur_clean) {
  torch::NoGradGuard no_grad;
  return teacher_->predict(refs, cur_clean).omega;
}

torch::Tensor JepaModel::student_predict(const head::ReferenceSet& refs,
                                         const torch::Tensor& cur_corrupt) {
  return student_->predict(refs, cur_corrupt).omega;
}

std::string JepaModel::teacher_hash() const { return parameter_hash(*teacher_); }

}  // namespace mptrack::jepa
